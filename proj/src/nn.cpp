#include "bcl/nn.hpp"

#include <cmath>

namespace bcl::nn {

namespace {

Mat sigmoid(const Mat& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

}  // namespace

// ---------------------------------------------------------------------------
// LSTM

LstmCell::LstmCell(const std::string& name, int in, int hidden,
                   std::mt19937_64& rng)
    : h_(hidden) {
  const double s = 1.0 / std::sqrt(static_cast<double>(in + hidden));
  wx_.init(name + ".wx", 4 * hidden, in, rng, s);
  wh_.init(name + ".wh", 4 * hidden, hidden, rng, s);
  b_.init(name + ".b", 4 * hidden, 1, rng, s);
}

std::vector<Mat> LstmCell::forward(const std::vector<Mat>& xs) {
  const std::size_t T = xs.size();
  const Eigen::Index B = xs[0].cols();
  xs_ = xs;
  hs_.assign(T, Mat());
  cs_.assign(T, Mat());
  gi_.assign(T, Mat());
  gf_.assign(T, Mat());
  gg_.assign(T, Mat());
  go_.assign(T, Mat());
  tc_.assign(T, Mat());
  Mat h = Mat::Zero(h_, B), c = Mat::Zero(h_, B);
  for (std::size_t t = 0; t < T; ++t) {
    Mat a = (wx_.value * xs[t] + wh_.value * h).colwise() +
            Eigen::VectorXd(b_.value.col(0));
    gi_[t] = sigmoid(a.topRows(h_));
    gf_[t] = sigmoid(a.middleRows(h_, h_));
    gg_[t] = a.middleRows(2 * h_, h_).array().tanh();
    go_[t] = sigmoid(a.bottomRows(h_));
    c = gf_[t].cwiseProduct(c) + gi_[t].cwiseProduct(gg_[t]);
    tc_[t] = c.array().tanh();
    h = go_[t].cwiseProduct(tc_[t]);
    hs_[t] = h;
    cs_[t] = c;
  }
  return hs_;
}

std::vector<Mat> LstmCell::backward(const std::vector<Mat>& dhs) {
  const std::size_t T = xs_.size();
  const Eigen::Index B = xs_[0].cols();
  std::vector<Mat> dxs(T);
  Mat dh_next = Mat::Zero(h_, B), dc_next = Mat::Zero(h_, B);
  for (std::size_t t = T; t-- > 0;) {
    Mat c_prev = t == 0 ? Mat(Mat::Zero(h_, B)) : cs_[t - 1];
    Mat h_prev = t == 0 ? Mat(Mat::Zero(h_, B)) : hs_[t - 1];
    Mat dh = dhs[t] + dh_next;
    Mat dgo = dh.cwiseProduct(tc_[t]);
    Mat dc = dc_next +
             dh.cwiseProduct(go_[t]).cwiseProduct(
                 (1.0 - tc_[t].array().square()).matrix());
    Mat dgf = dc.cwiseProduct(c_prev);
    Mat dgi = dc.cwiseProduct(gg_[t]);
    Mat dgg = dc.cwiseProduct(gi_[t]);
    dc_next = dc.cwiseProduct(gf_[t]);

    Mat da(4 * h_, B);
    da.topRows(h_) =
        dgi.cwiseProduct(gi_[t]).cwiseProduct((1.0 - gi_[t].array()).matrix());
    da.middleRows(h_, h_) =
        dgf.cwiseProduct(gf_[t]).cwiseProduct((1.0 - gf_[t].array()).matrix());
    da.middleRows(2 * h_, h_) =
        dgg.cwiseProduct((1.0 - gg_[t].array().square()).matrix());
    da.bottomRows(h_) =
        dgo.cwiseProduct(go_[t]).cwiseProduct((1.0 - go_[t].array()).matrix());

    wx_.grad += da * xs_[t].transpose();
    wh_.grad += da * h_prev.transpose();
    b_.grad += da.rowwise().sum();
    dxs[t] = wx_.value.transpose() * da;
    dh_next = wh_.value.transpose() * da;
  }
  return dxs;
}

// ---------------------------------------------------------------------------
// GRU

GruCell::GruCell(const std::string& name, int in, int hidden,
                 std::mt19937_64& rng)
    : h_(hidden) {
  const double s = 1.0 / std::sqrt(static_cast<double>(in + hidden));
  wxz_.init(name + ".wxz", hidden, in, rng, s);
  whz_.init(name + ".whz", hidden, hidden, rng, s);
  bz_.init(name + ".bz", hidden, 1, rng, s);
  wxr_.init(name + ".wxr", hidden, in, rng, s);
  whr_.init(name + ".whr", hidden, hidden, rng, s);
  br_.init(name + ".br", hidden, 1, rng, s);
  wxn_.init(name + ".wxn", hidden, in, rng, s);
  whn_.init(name + ".whn", hidden, hidden, rng, s);
  bn_.init(name + ".bn", hidden, 1, rng, s);
}

std::vector<Mat> GruCell::forward(const std::vector<Mat>& xs) {
  const std::size_t T = xs.size();
  const Eigen::Index B = xs[0].cols();
  xs_ = xs;
  hs_.assign(T, Mat());
  gz_.assign(T, Mat());
  gr_.assign(T, Mat());
  gn_.assign(T, Mat());
  hn_.assign(T, Mat());
  Mat h = Mat::Zero(h_, B);
  for (std::size_t t = 0; t < T; ++t) {
    gz_[t] = sigmoid((wxz_.value * xs[t] + whz_.value * h).colwise() +
                     Eigen::VectorXd(bz_.value.col(0)));
    gr_[t] = sigmoid((wxr_.value * xs[t] + whr_.value * h).colwise() +
                     Eigen::VectorXd(br_.value.col(0)));
    hn_[t] = whn_.value * h;
    gn_[t] = (((wxn_.value * xs[t] + gr_[t].cwiseProduct(hn_[t])).colwise() +
               Eigen::VectorXd(bn_.value.col(0)))
                  .array()
                  .tanh())
                 .matrix();
    h = (1.0 - gz_[t].array()).matrix().cwiseProduct(gn_[t]) +
        gz_[t].cwiseProduct(h);
    hs_[t] = h;
  }
  return hs_;
}

std::vector<Mat> GruCell::backward(const std::vector<Mat>& dhs) {
  const std::size_t T = xs_.size();
  const Eigen::Index B = xs_[0].cols();
  std::vector<Mat> dxs(T);
  Mat dh_next = Mat::Zero(h_, B);
  for (std::size_t t = T; t-- > 0;) {
    Mat h_prev = t == 0 ? Mat(Mat::Zero(h_, B)) : hs_[t - 1];
    Mat dh = dhs[t] + dh_next;
    Mat dz = dh.cwiseProduct(h_prev - gn_[t]);
    Mat dn = dh.cwiseProduct((1.0 - gz_[t].array()).matrix());
    Mat dh_prev = dh.cwiseProduct(gz_[t]);

    Mat dan = dn.cwiseProduct((1.0 - gn_[t].array().square()).matrix());
    Mat dr = dan.cwiseProduct(hn_[t]);
    Mat dhn = dan.cwiseProduct(gr_[t]);
    Mat daz = dz.cwiseProduct(gz_[t]).cwiseProduct((1.0 - gz_[t].array()).matrix());
    Mat dar = dr.cwiseProduct(gr_[t]).cwiseProduct((1.0 - gr_[t].array()).matrix());

    wxn_.grad += dan * xs_[t].transpose();
    bn_.grad += dan.rowwise().sum();
    whn_.grad += dhn * h_prev.transpose();
    wxz_.grad += daz * xs_[t].transpose();
    whz_.grad += daz * h_prev.transpose();
    bz_.grad += daz.rowwise().sum();
    wxr_.grad += dar * xs_[t].transpose();
    whr_.grad += dar * h_prev.transpose();
    br_.grad += dar.rowwise().sum();

    dh_prev += whn_.value.transpose() * dhn + whz_.value.transpose() * daz +
               whr_.value.transpose() * dar;
    dxs[t] = wxn_.value.transpose() * dan + wxz_.value.transpose() * daz +
             wxr_.value.transpose() * dar;
    dh_next = dh_prev;
  }
  return dxs;
}

std::unique_ptr<Cell> make_cell(CellKind kind, const std::string& name, int in,
                                int hidden, std::mt19937_64& rng) {
  if (kind == CellKind::kLstm)
    return std::make_unique<LstmCell>(name, in, hidden, rng);
  return std::make_unique<GruCell>(name, in, hidden, rng);
}

// ---------------------------------------------------------------------------
// RecurrentNet

RecurrentNet::RecurrentNet(CellKind kind, int in_dim, int out_dim, int n_layers,
                           int units, std::uint64_t seed)
    : kind_(kind), in_dim_(in_dim), out_dim_(out_dim) {
  std::mt19937_64 rng(seed);
  int in = in_dim;
  for (int l = 0; l < n_layers; ++l) {
    layers_.push_back(make_cell(kind, "rnn" + std::to_string(l), in, units, rng));
    in = units;
  }
  head_.init("head", units, out_dim, rng);
}

Mat RecurrentNet::forward(const std::vector<Mat>& xs) {
  seq_len_ = xs.size();
  std::vector<Mat> h = xs;
  for (auto& layer : layers_) h = layer->forward(h);
  return head_.forward(h.back());
}

void RecurrentNet::backward(const Mat& dy) {
  Mat dh_last = head_.backward(dy);
  std::vector<Mat> dhs(seq_len_, Mat::Zero(dh_last.rows(), dh_last.cols()));
  dhs.back() = dh_last;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    std::vector<Mat> dxs = layers_[l]->backward(dhs);
    if (l == 0) break;
    dhs = std::move(dxs);
  }
}

std::vector<Param*> RecurrentNet::params() {
  std::vector<Param*> ps;
  for (auto& layer : layers_)
    for (Param* p : layer->params()) ps.push_back(p);
  for (Param* p : head_.params()) ps.push_back(p);
  return ps;
}

// ---------------------------------------------------------------------------
// MLP

Mlp::Mlp(const std::string& name, int in_dim, const std::vector<int>& hidden,
         int out_dim, std::mt19937_64& rng) {
  int in = in_dim;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    Dense d;
    d.init(name + ".fc" + std::to_string(i), in, hidden[i], rng);
    dense_.push_back(std::move(d));
    relu_.emplace_back();
    in = hidden[i];
  }
  Dense out;
  out.init(name + ".out", in, out_dim, rng);
  dense_.push_back(std::move(out));
}

Mat Mlp::forward(const Mat& x) {
  Mat h = x;
  for (std::size_t i = 0; i + 1 < dense_.size(); ++i)
    h = relu_[i].forward(dense_[i].forward(h));
  return dense_.back().forward(h);
}

Mat Mlp::backward(const Mat& dy) {
  Mat d = dense_.back().backward(dy);
  for (std::size_t i = dense_.size() - 1; i-- > 0;)
    d = dense_[i].backward(relu_[i].backward(d));
  return d;
}

std::vector<Param*> Mlp::params() {
  std::vector<Param*> ps;
  for (Dense& d : dense_)
    for (Param* p : d.params()) ps.push_back(p);
  return ps;
}

// ---------------------------------------------------------------------------
// Adam

void Adam::step(const std::vector<Param*>& ps) {
  if (m_.empty()) {
    for (Param* p : ps) {
      m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    Param* p = ps[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p->grad;
    v_[i] = beta2_ * v_[i].array().matrix() +
            (1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
    const Mat mhat = m_[i] / bc1;
    const Mat vhat = v_[i] / bc2;
    p->value.array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
  }
}

// ---------------------------------------------------------------------------
// Gradient checking

double grad_check(const std::vector<Param*>& params,
                  const std::function<double()>& loss_forward,
                  const std::function<void()>& loss_backward, double h) {
  zero_grads(params);
  loss_backward();
  double max_rel = 0.0;
  for (Param* p : params) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      const double saved = p->value.data()[i];
      p->value.data()[i] = saved + h;
      const double lp = loss_forward();
      p->value.data()[i] = saved - h;
      const double lm = loss_forward();
      p->value.data()[i] = saved;
      const double g_num = (lp - lm) / (2.0 * h);
      const double g_an = p->grad.data()[i];
      const double denom = std::max({1e-8, std::abs(g_num), std::abs(g_an)});
      max_rel = std::max(max_rel, std::abs(g_num - g_an) / denom);
    }
  }
  return max_rel;
}

}  // namespace bcl::nn
