#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace bcl::nn {

using Mat = Eigen::MatrixXd;

struct Param {
  std::string name;
  Mat value;
  Mat grad;

  void init(const std::string& n, int rows, int cols, std::mt19937_64& rng,
            double scale) {
    name = n;
    value.resize(rows, cols);
    std::uniform_real_distribution<double> u(-scale, scale);
    for (Eigen::Index i = 0; i < value.size(); ++i) value.data()[i] = u(rng);
    grad = Mat::Zero(rows, cols);
  }
};

inline void zero_grads(const std::vector<Param*>& ps) {
  for (Param* p : ps) p->grad.setZero();
}

// Columns are batch samples throughout: x is in_dim x B.
struct Dense {
  Param w, b;
  Mat x_cache;

  void init(const std::string& name, int in, int out, std::mt19937_64& rng) {
    const double s = 1.0 / std::sqrt(static_cast<double>(in));
    w.init(name + ".w", out, in, rng, s);
    b.init(name + ".b", out, 1, rng, s);
  }
  Mat forward(const Mat& x) {
    x_cache = x;
    return (w.value * x).colwise() + Eigen::VectorXd(b.value.col(0));
  }
  Mat backward(const Mat& dy) {
    w.grad += dy * x_cache.transpose();
    b.grad += dy.rowwise().sum();
    return w.value.transpose() * dy;
  }
  std::vector<Param*> params() { return {&w, &b}; }
};

struct Relu {
  Mat mask;
  Mat forward(const Mat& x) {
    mask = (x.array() > 0.0).cast<double>();
    return x.cwiseProduct(mask);
  }
  Mat backward(const Mat& dy) { return dy.cwiseProduct(mask); }
};

struct Tanh {
  Mat y;
  Mat forward(const Mat& x) {
    y = x.array().tanh();
    return y;
  }
  Mat backward(const Mat& dy) {
    return dy.cwiseProduct((1.0 - y.array().square()).matrix());
  }
};

// Recurrent cell over a whole sequence. Caches are held internally;
// a cell instance is single-owner during training.
class Cell {
 public:
  virtual ~Cell() = default;
  virtual std::vector<Mat> forward(const std::vector<Mat>& xs) = 0;
  // dhs: per-timestep gradient on the hidden outputs (zero where unused).
  virtual std::vector<Mat> backward(const std::vector<Mat>& dhs) = 0;
  virtual std::vector<Param*> params() = 0;
  virtual int hidden_size() const = 0;
};

class LstmCell final : public Cell {
 public:
  LstmCell(const std::string& name, int in, int hidden, std::mt19937_64& rng);
  std::vector<Mat> forward(const std::vector<Mat>& xs) override;
  std::vector<Mat> backward(const std::vector<Mat>& dhs) override;
  std::vector<Param*> params() override { return {&wx_, &wh_, &b_}; }
  int hidden_size() const override { return h_; }

 private:
  int h_;
  Param wx_, wh_, b_;  // gate order: i, f, g, o
  std::vector<Mat> xs_, hs_, cs_, gi_, gf_, gg_, go_, tc_;
};

class GruCell final : public Cell {
 public:
  GruCell(const std::string& name, int in, int hidden, std::mt19937_64& rng);
  std::vector<Mat> forward(const std::vector<Mat>& xs) override;
  std::vector<Mat> backward(const std::vector<Mat>& dhs) override;
  std::vector<Param*> params() override { return {&wxz_, &whz_, &bz_, &wxr_, &whr_, &br_, &wxn_, &whn_, &bn_}; }
  int hidden_size() const override { return h_; }

 private:
  int h_;
  Param wxz_, whz_, bz_, wxr_, whr_, br_, wxn_, whn_, bn_;
  std::vector<Mat> xs_, hs_, gz_, gr_, gn_, hn_;  // hn_ = whn * h_prev
};

enum class CellKind { kLstm, kGru };

std::unique_ptr<Cell> make_cell(CellKind kind, const std::string& name, int in,
                                int hidden, std::mt19937_64& rng);

// Stacked recurrent layers plus a dense head applied at the last timestep.
class RecurrentNet {
 public:
  RecurrentNet(CellKind kind, int in_dim, int out_dim, int n_layers, int units,
               std::uint64_t seed);

  // xs: per-timestep in_dim x B inputs; returns out_dim x B.
  Mat forward(const std::vector<Mat>& xs);
  // dy: out_dim x B gradient; accumulates parameter grads.
  void backward(const Mat& dy);
  std::vector<Param*> params();

  CellKind kind() const { return kind_; }
  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }

 private:
  CellKind kind_;
  int in_dim_, out_dim_;
  std::vector<std::unique_ptr<Cell>> layers_;
  Dense head_;
  std::size_t seq_len_ = 0;
};

// 2-hidden-layer ReLU MLP (the actor/critic trunk).
class Mlp {
 public:
  Mlp(const std::string& name, int in_dim, const std::vector<int>& hidden,
      int out_dim, std::mt19937_64& rng);
  Mat forward(const Mat& x);
  Mat backward(const Mat& dy);  // returns gradient wrt input
  std::vector<Param*> params();

 private:
  std::vector<Dense> dense_;
  std::vector<Relu> relu_;
};

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(const std::vector<Param*>& ps);
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Mat> m_, v_;
};

// Max relative error between reverse-mode and central finite differences,
// over every parameter entry. `loss` must be a pure function of the params.
double grad_check(const std::vector<Param*>& params,
                  const std::function<double()>& loss_forward,
                  const std::function<void()>& loss_backward, double h = 1e-6);

}  // namespace bcl::nn
