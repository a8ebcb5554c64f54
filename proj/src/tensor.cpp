#include "se3net/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace se3net {

namespace {

int product(const std::vector<int>& s) {
  int n = 1;
  for (int d : s) n *= d;
  return n;
}

void check_shape_dims(const std::vector<int>& s, const char* who) {
  for (int d : s)
    if (d <= 0)
      throw std::invalid_argument(std::string(who) +
                                  ": non-positive dimension in " +
                                  shape_str(s));
}

}  // namespace

std::string shape_str(const std::vector<int>& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ",";
    os << s[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(std::vector<int> shape, bool requires_grad) {
  check_shape_dims(shape, "Tensor");
  impl_ = std::make_shared<Impl>();
  impl_->shape = std::move(shape);
  impl_->data.assign(product(impl_->shape), 0.0);
  impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  return Tensor(std::move(shape), requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
  Tensor t(std::move(shape), requires_grad);
  std::fill(t.data().begin(), t.data().end(), value);
  return t;
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<double> data,
                         bool requires_grad) {
  Tensor t(std::move(shape), requires_grad);
  if (static_cast<int>(data.size()) != t.numel())
    throw std::invalid_argument("Tensor::from_data: " +
                                std::to_string(data.size()) +
                                " values for shape " + shape_str(t.shape()));
  t.impl_->data = std::move(data);
  return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

const std::vector<int>& Tensor::shape() const {
  if (!impl_) throw std::runtime_error("Tensor: undefined");
  return impl_->shape;
}
int Tensor::rank() const { return static_cast<int>(shape().size()); }
int Tensor::dim(int axis) const { return shape().at(axis); }
int Tensor::numel() const { return static_cast<int>(impl_->data.size()); }

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }
void Tensor::set_requires_grad(bool rg) {
  if (!impl_) throw std::runtime_error("Tensor: undefined");
  impl_->requires_grad = rg;
}

std::vector<double>& Tensor::data() {
  if (!impl_) throw std::runtime_error("Tensor: undefined");
  return impl_->data;
}
const std::vector<double>& Tensor::data() const {
  if (!impl_) throw std::runtime_error("Tensor: undefined");
  return impl_->data;
}

bool Tensor::has_grad() const { return impl_ && !impl_->grad.empty(); }

std::vector<double>& Tensor::grad() {
  if (!impl_) throw std::runtime_error("Tensor: undefined");
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

const std::vector<double>& Tensor::grad() const {
  if (!impl_ || impl_->grad.empty())
    throw std::runtime_error("Tensor: no gradient populated");
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (impl_ && !impl_->grad.empty())
    std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

void Tensor::drop_grad() {
  if (impl_) impl_->grad.clear();
}

double Tensor::value() const {
  if (numel() != 1)
    throw std::runtime_error("Tensor::value: not a scalar, shape " +
                             shape_str(shape()));
  return impl_->data[0];
}

double& Tensor::at(int i) { return impl_->data[i]; }
double& Tensor::at(int i, int j) { return impl_->data[i * shape()[1] + j]; }
double& Tensor::at(int i, int j, int k) {
  const auto& s = shape();
  return impl_->data[(i * s[1] + j) * s[2] + k];
}
double& Tensor::at(int i, int j, int k, int l) {
  const auto& s = shape();
  return impl_->data[((i * s[1] + j) * s[2] + k) * s[3] + l];
}
double Tensor::at(int i) const { return impl_->data[i]; }
double Tensor::at(int i, int j) const { return impl_->data[i * shape()[1] + j]; }
double Tensor::at(int i, int j, int k) const {
  const auto& s = shape();
  return impl_->data[(i * s[1] + j) * s[2] + k];
}
double Tensor::at(int i, int j, int k, int l) const {
  const auto& s = shape();
  return impl_->data[((i * s[1] + j) * s[2] + k) * s[3] + l];
}

Tensor Tensor::clone() const {
  if (!impl_) return Tensor();
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->shape = impl_->shape;
  t.impl_->data = impl_->data;
  t.impl_->requires_grad = impl_->requires_grad;
  return t;
}

// ---------------------------------------------------------------------------
// Graph

Tensor Graph::emit(std::vector<int> shape, bool requires_grad) {
  Tensor t(std::move(shape), requires_grad);
  produced_.insert(t.id());
  return t;
}

bool Graph::produced(const Tensor& t) const {
  return t.defined() && produced_.count(t.id()) > 0;
}

void Graph::reset() {
  nodes_.clear();
  produced_.clear();
  backward_done_ = false;
}

void Graph::backward(const Tensor& loss) {
  if (backward_done_)
    throw std::runtime_error(
        "Graph::backward: tape already consumed; call reset() first");
  if (!loss.defined() || loss.numel() != 1)
    throw std::runtime_error("Graph::backward: loss must be a scalar tensor");
  if (!produced(loss))
    throw std::runtime_error(
        "Graph::backward: loss was not produced by this graph");
  backward_done_ = true;
  Tensor l = loss;
  l.grad()[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

// ---------------------------------------------------------------------------
// Ops

Tensor Graph::matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
    throw std::invalid_argument("matmul: incompatible shapes " +
                                shape_str(a.shape()) + " x " +
                                shape_str(b.shape()));
  int m = a.dim(0), p = a.dim(1), q = b.dim(1);
  bool track = a.requires_grad() || b.requires_grad();
  Tensor out = emit({m, q}, track);
  {
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < q; ++j) {
        double acc = 0.0;
        for (int t = 0; t < p; ++t) acc += pa[i * p + t] * pb[t * q + j];
        po[i * q + j] = acc;
      }
  }
  if (track) {
    Tensor ac = a, bc = b, oc = out;
    record([ac, bc, oc, m, p, q]() mutable {
      if (!oc.has_grad()) return;
      const double* g = oc.grad().data();
      if (ac.requires_grad()) {
        double* ga = ac.grad().data();
        const double* pb = bc.data().data();
        for (int i = 0; i < m; ++i)
          for (int t = 0; t < p; ++t) {
            double acc = 0.0;
            for (int j = 0; j < q; ++j) acc += g[i * q + j] * pb[t * q + j];
            ga[i * p + t] += acc;
          }
      }
      if (bc.requires_grad()) {
        double* gb = bc.grad().data();
        const double* pa = ac.data().data();
        for (int t = 0; t < p; ++t)
          for (int j = 0; j < q; ++j) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) acc += pa[i * p + t] * g[i * q + j];
            gb[t * q + j] += acc;
          }
      }
    });
  }
  return out;
}

Tensor Graph::conv2d(const Tensor& x, const Tensor& w, const Tensor& b,
                     int stride, int pad) {
  if (x.rank() != 3 || w.rank() != 4 || b.rank() != 1)
    throw std::invalid_argument("conv2d: expected x[C,H,W] w[F,C,kh,kw] b[F], got " +
                                shape_str(x.shape()) + " " + shape_str(w.shape()) +
                                " " + shape_str(b.shape()));
  int C = x.dim(0), H = x.dim(1), W = x.dim(2);
  int F = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(1) != C)
    throw std::invalid_argument("conv2d: channel mismatch x " +
                                shape_str(x.shape()) + " vs w " +
                                shape_str(w.shape()));
  if (b.dim(0) != F)
    throw std::invalid_argument("conv2d: bias size " + shape_str(b.shape()) +
                                " vs filters " + std::to_string(F));
  if (stride < 1 || pad < 0 || kh > H + 2 * pad || kw > W + 2 * pad)
    throw std::invalid_argument("conv2d: invalid stride/pad/kernel for input " +
                                shape_str(x.shape()) + " kernel " +
                                shape_str(w.shape()));
  int Ho = (H + 2 * pad - kh) / stride + 1;
  int Wo = (W + 2 * pad - kw) / stride + 1;
  if (Ho <= 0 || Wo <= 0)
    throw std::invalid_argument("conv2d: non-positive output size for input " +
                                shape_str(x.shape()));
  bool track = x.requires_grad() || w.requires_grad() || b.requires_grad();
  Tensor out = emit({F, Ho, Wo}, track);
  {
    const double* px = x.data().data();
    const double* pw = w.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (int f = 0; f < F; ++f)
      for (int oy = 0; oy < Ho; ++oy)
        for (int ox = 0; ox < Wo; ++ox) {
          double acc = pb[f];
          for (int c = 0; c < C; ++c)
            for (int ky = 0; ky < kh; ++ky) {
              int iy = oy * stride + ky - pad;
              if (iy < 0 || iy >= H) continue;
              for (int kx = 0; kx < kw; ++kx) {
                int ix = ox * stride + kx - pad;
                if (ix < 0 || ix >= W) continue;
                acc += px[(c * H + iy) * W + ix] *
                       pw[((f * C + c) * kh + ky) * kw + kx];
              }
            }
          po[(f * Ho + oy) * Wo + ox] = acc;
        }
  }
  if (track) {
    Tensor xc = x, wc = w, bc = b, oc = out;
    record([xc, wc, bc, oc, C, H, W, F, kh, kw, Ho, Wo, stride, pad]() mutable {
      if (!oc.has_grad()) return;
      const double* g = oc.grad().data();
      const double* px = xc.data().data();
      const double* pw = wc.data().data();
      double* gx = xc.requires_grad() ? xc.grad().data() : nullptr;
      double* gw = wc.requires_grad() ? wc.grad().data() : nullptr;
      double* gb = bc.requires_grad() ? bc.grad().data() : nullptr;
      for (int f = 0; f < F; ++f)
        for (int oy = 0; oy < Ho; ++oy)
          for (int ox = 0; ox < Wo; ++ox) {
            double go = g[(f * Ho + oy) * Wo + ox];
            if (gb) gb[f] += go;
            for (int c = 0; c < C; ++c)
              for (int ky = 0; ky < kh; ++ky) {
                int iy = oy * stride + ky - pad;
                if (iy < 0 || iy >= H) continue;
                for (int kx = 0; kx < kw; ++kx) {
                  int ix = ox * stride + kx - pad;
                  if (ix < 0 || ix >= W) continue;
                  int xi = (c * H + iy) * W + ix;
                  int wi = ((f * C + c) * kh + ky) * kw + kx;
                  if (gw) gw[wi] += go * px[xi];
                  if (gx) gx[xi] += go * pw[wi];
                }
              }
          }
    });
  }
  return out;
}

Tensor Graph::deconv2d(const Tensor& x, const Tensor& w, const Tensor& b,
                       int stride, int pad) {
  if (x.rank() != 3 || w.rank() != 4 || b.rank() != 1)
    throw std::invalid_argument(
        "deconv2d: expected x[F,H,W] w[F,C,kh,kw] b[C], got " +
        shape_str(x.shape()) + " " + shape_str(w.shape()) + " " +
        shape_str(b.shape()));
  int F = x.dim(0), H = x.dim(1), W = x.dim(2);
  int C = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(0) != F)
    throw std::invalid_argument("deconv2d: channel mismatch x " +
                                shape_str(x.shape()) + " vs w " +
                                shape_str(w.shape()));
  if (b.dim(0) != C)
    throw std::invalid_argument("deconv2d: bias size " + shape_str(b.shape()) +
                                " vs out channels " + std::to_string(C));
  if (stride < 1 || pad < 0)
    throw std::invalid_argument("deconv2d: invalid stride/pad");
  int Ho = (H - 1) * stride + kh - 2 * pad;
  int Wo = (W - 1) * stride + kw - 2 * pad;
  if (Ho <= 0 || Wo <= 0)
    throw std::invalid_argument("deconv2d: non-positive output size for input " +
                                shape_str(x.shape()) + " kernel " +
                                shape_str(w.shape()));
  bool track = x.requires_grad() || w.requires_grad() || b.requires_grad();
  Tensor out = emit({C, Ho, Wo}, track);
  {
    // Gather form of the adjoint: out(c,iy,ix) sums x(f,oy,ox)*w(f,c,ky,kx)
    // over the conv window mapping iy = oy*stride + ky - pad.
    const double* px = x.data().data();
    const double* pw = w.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (int c = 0; c < C; ++c)
      for (int iy = 0; iy < Ho; ++iy)
        for (int ix = 0; ix < Wo; ++ix) {
          double acc = pb[c];
          for (int f = 0; f < F; ++f)
            for (int ky = 0; ky < kh; ++ky) {
              int ny = iy + pad - ky;
              if (ny < 0 || ny % stride) continue;
              int oy = ny / stride;
              if (oy >= H) continue;
              for (int kx = 0; kx < kw; ++kx) {
                int nx = ix + pad - kx;
                if (nx < 0 || nx % stride) continue;
                int ox = nx / stride;
                if (ox >= W) continue;
                acc += px[(f * H + oy) * W + ox] *
                       pw[((f * C + c) * kh + ky) * kw + kx];
              }
            }
          po[(c * Ho + iy) * Wo + ix] = acc;
        }
  }
  if (track) {
    Tensor xc = x, wc = w, bc = b, oc = out;
    record([xc, wc, bc, oc, C, H, W, F, kh, kw, Ho, Wo, stride, pad]() mutable {
      if (!oc.has_grad()) return;
      const double* g = oc.grad().data();
      const double* px = xc.data().data();
      const double* pw = wc.data().data();
      double* gx = xc.requires_grad() ? xc.grad().data() : nullptr;
      double* gw = wc.requires_grad() ? wc.grad().data() : nullptr;
      double* gb = bc.requires_grad() ? bc.grad().data() : nullptr;
      if (gb)
        for (int c = 0; c < C; ++c)
          for (int i = 0; i < Ho * Wo; ++i) gb[c] += g[c * Ho * Wo + i];
      // dx is a conv of g with the same weights; dw correlates x with g.
      for (int f = 0; f < F; ++f)
        for (int oy = 0; oy < H; ++oy)
          for (int ox = 0; ox < W; ++ox) {
            double xv = px[(f * H + oy) * W + ox];
            double accx = 0.0;
            for (int c = 0; c < C; ++c)
              for (int ky = 0; ky < kh; ++ky) {
                int iy = oy * stride + ky - pad;
                if (iy < 0 || iy >= Ho) continue;
                for (int kx = 0; kx < kw; ++kx) {
                  int ix = ox * stride + kx - pad;
                  if (ix < 0 || ix >= Wo) continue;
                  double go = g[(c * Ho + iy) * Wo + ix];
                  int wi = ((f * C + c) * kh + ky) * kw + kx;
                  if (gw) gw[wi] += go * xv;
                  accx += go * pw[wi];
                }
              }
            if (gx) gx[(f * H + oy) * W + ox] += accx;
          }
    });
  }
  return out;
}

Tensor Graph::prelu(const Tensor& x, const Tensor& slope) {
  if (slope.rank() != 1)
    throw std::invalid_argument("prelu: slope must be rank-1, got " +
                                shape_str(slope.shape()));
  int channels = x.dim(0);
  int ns = slope.dim(0);
  if (ns != 1 && ns != channels)
    throw std::invalid_argument("prelu: slope " + shape_str(slope.shape()) +
                                " does not match channel dim of " +
                                shape_str(x.shape()));
  int n = x.numel();
  int per = n / channels;
  bool track = x.requires_grad() || slope.requires_grad();
  Tensor out = emit(x.shape(), track);
  {
    const double* px = x.data().data();
    const double* ps = slope.data().data();
    double* po = out.data().data();
    for (int i = 0; i < n; ++i) {
      double s = ps[ns == 1 ? 0 : i / per];
      po[i] = px[i] > 0.0 ? px[i] : s * px[i];
    }
  }
  if (track) {
    Tensor xc = x, sc = slope, oc = out;
    record([xc, sc, oc, n, ns, per]() mutable {
      if (!oc.has_grad()) return;
      const double* g = oc.grad().data();
      const double* px = xc.data().data();
      const double* ps = sc.data().data();
      double* gx = xc.requires_grad() ? xc.grad().data() : nullptr;
      double* gs = sc.requires_grad() ? sc.grad().data() : nullptr;
      for (int i = 0; i < n; ++i) {
        int c = ns == 1 ? 0 : i / per;
        if (px[i] > 0.0) {
          if (gx) gx[i] += g[i];
        } else {
          if (gx) gx[i] += g[i] * ps[c];
          if (gs) gs[c] += g[i] * px[i];
        }
      }
    });
  }
  return out;
}

Tensor Graph::channel_softmax(const Tensor& x) {
  if (x.rank() != 3)
    throw std::invalid_argument("channel_softmax: expected [k,H,W], got " +
                                shape_str(x.shape()));
  int k = x.dim(0), hw = x.dim(1) * x.dim(2);
  bool track = x.requires_grad();
  Tensor out = emit(x.shape(), track);
  {
    const double* px = x.data().data();
    double* po = out.data().data();
    for (int j = 0; j < hw; ++j) {
      double mx = px[j];
      for (int i = 1; i < k; ++i) mx = std::max(mx, px[i * hw + j]);
      double sum = 0.0;
      for (int i = 0; i < k; ++i) {
        double e = std::exp(px[i * hw + j] - mx);
        po[i * hw + j] = e;
        sum += e;
      }
      double inv = 1.0 / sum;
      for (int i = 0; i < k; ++i) po[i * hw + j] *= inv;
    }
  }
  if (track) {
    Tensor xc = x, oc = out;
    record([xc, oc, k, hw]() mutable {
      if (!oc.has_grad()) return;
      const double* g = oc.grad().data();
      const double* y = oc.data().data();
      double* gx = xc.grad().data();
      for (int j = 0; j < hw; ++j) {
        double s = 0.0;
        for (int i = 0; i < k; ++i) s += g[i * hw + j] * y[i * hw + j];
        for (int i = 0; i < k; ++i)
          gx[i * hw + j] += y[i * hw + j] * (g[i * hw + j] - s);
      }
    });
  }
  return out;
}

Tensor Graph::mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape())
    throw std::invalid_argument("mse_loss: shape mismatch " +
                                shape_str(pred.shape()) + " vs " +
                                shape_str(target.shape()));
  int n = pred.numel();
  bool track = pred.requires_grad() || target.requires_grad();
  Tensor out = emit({1}, track);
  {
    const double* pp = pred.data().data();
    const double* pt = target.data().data();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = pp[i] - pt[i];
      acc += d * d;
    }
    out.data()[0] = acc / n;
  }
  if (track) {
    Tensor pc = pred, tc = target, oc = out;
    record([pc, tc, oc, n]() mutable {
      if (!oc.has_grad()) return;
      double g = oc.grad()[0] * 2.0 / n;
      const double* pp = pc.data().data();
      const double* pt = tc.data().data();
      double* gp = pc.requires_grad() ? pc.grad().data() : nullptr;
      double* gt = tc.requires_grad() ? tc.grad().data() : nullptr;
      for (int i = 0; i < n; ++i) {
        double d = g * (pp[i] - pt[i]);
        if (gp) gp[i] += d;
        if (gt) gt[i] -= d;
      }
    });
  }
  return out;
}

Tensor Graph::weighted_mse_loss(const Tensor& pred, const Tensor& target,
                                const Tensor& pixel_weights) {
  if (pred.shape() != target.shape())
    throw std::invalid_argument("weighted_mse_loss: shape mismatch " +
                                shape_str(pred.shape()) + " vs " +
                                shape_str(target.shape()));
  if (pred.rank() != 3 || pixel_weights.rank() != 2 ||
      pixel_weights.dim(0) != pred.dim(1) || pixel_weights.dim(1) != pred.dim(2))
    throw std::invalid_argument("weighted_mse_loss: weights " +
                                shape_str(pixel_weights.shape()) +
                                " do not match pred " + shape_str(pred.shape()));
  int c = pred.dim(0), hw = pred.dim(1) * pred.dim(2);
  bool track = pred.requires_grad();
  Tensor out = emit({1}, track);
  double wsum = 0.0;
  {
    const double* pw = pixel_weights.data().data();
    for (int j = 0; j < hw; ++j) wsum += pw[j];
    const double* pp = pred.data().data();
    const double* pt = target.data().data();
    double acc = 0.0;
    for (int j = 0; j < hw; ++j) {
      if (pw[j] == 0.0) continue;
      double e = 0.0;
      for (int ci = 0; ci < c; ++ci) {
        double d = pp[ci * hw + j] - pt[ci * hw + j];
        e += d * d;
      }
      acc += pw[j] * e;
    }
    out.data()[0] = wsum > 0.0 ? acc / wsum : 0.0;
  }
  if (track && wsum > 0.0) {
    Tensor pc = pred, tc = target, wc = pixel_weights, oc = out;
    record([pc, tc, wc, oc, c, hw, wsum]() mutable {
      if (!oc.has_grad()) return;
      double g = oc.grad()[0] * 2.0 / wsum;
      const double* pp = pc.data().data();
      const double* pt = tc.data().data();
      const double* pw = wc.data().data();
      double* gp = pc.grad().data();
      for (int j = 0; j < hw; ++j) {
        if (pw[j] == 0.0) continue;
        double gw = g * pw[j];
        for (int ci = 0; ci < c; ++ci)
          gp[ci * hw + j] += gw * (pp[ci * hw + j] - pt[ci * hw + j]);
      }
    });
  }
  return out;
}

Tensor Graph::add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw std::invalid_argument("add: shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
  int n = a.numel();
  bool track = a.requires_grad() || b.requires_grad();
  Tensor out = emit(a.shape(), track);
  {
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (int i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
  }
  if (track) {
    Tensor ac = a, bc = b, oc = out;
    record([ac, bc, oc, n]() mutable {
      if (!oc.has_grad()) return;
      const double* g = oc.grad().data();
      if (ac.requires_grad()) {
        double* ga = ac.grad().data();
        for (int i = 0; i < n; ++i) ga[i] += g[i];
      }
      if (bc.requires_grad()) {
        double* gb = bc.grad().data();
        for (int i = 0; i < n; ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

Tensor Graph::scale(const Tensor& a, double s) {
  int n = a.numel();
  bool track = a.requires_grad();
  Tensor out = emit(a.shape(), track);
  for (int i = 0; i < n; ++i) out.data()[i] = a.data()[i] * s;
  if (track) {
    Tensor ac = a, oc = out;
    record([ac, oc, s, n]() mutable {
      if (!oc.has_grad()) return;
      const double* g = oc.grad().data();
      double* ga = ac.grad().data();
      for (int i = 0; i < n; ++i) ga[i] += g[i] * s;
    });
  }
  return out;
}

Tensor Graph::reshape(const Tensor& a, std::vector<int> shape) {
  check_shape_dims(shape, "reshape");
  if (product(shape) != a.numel())
    throw std::invalid_argument("reshape: cannot view " +
                                shape_str(a.shape()) + " as " +
                                shape_str(shape));
  bool track = a.requires_grad();
  Tensor out = emit(std::move(shape), track);
  out.data() = a.data();
  if (track) {
    Tensor ac = a, oc = out;
    record([ac, oc]() mutable {
      if (!oc.has_grad()) return;
      const auto& g = oc.grad();
      auto& ga = ac.grad();
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  return out;
}

Tensor Graph::concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  int rank = parts[0].rank();
  if (axis < 0 || axis >= rank)
    throw std::invalid_argument("concat: axis " + std::to_string(axis) +
                                " out of range for rank " +
                                std::to_string(rank));
  std::vector<int> shape = parts[0].shape();
  int axis_total = 0;
  for (const auto& p : parts) {
    if (p.rank() != rank)
      throw std::invalid_argument("concat: rank mismatch " +
                                  shape_str(parts[0].shape()) + " vs " +
                                  shape_str(p.shape()));
    for (int d = 0; d < rank; ++d)
      if (d != axis && p.dim(d) != shape[d])
        throw std::invalid_argument("concat: shape mismatch " +
                                    shape_str(parts[0].shape()) + " vs " +
                                    shape_str(p.shape()));
    axis_total += p.dim(axis);
  }
  shape[axis] = axis_total;
  int outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= shape[d];
  for (int d = axis + 1; d < rank; ++d) inner *= shape[d];
  bool track = false;
  for (const auto& p : parts) track = track || p.requires_grad();
  Tensor out = emit(shape, track);
  {
    double* po = out.data().data();
    int out_stride = axis_total * inner;
    int off = 0;
    for (const auto& p : parts) {
      int chunk = p.dim(axis) * inner;
      const double* pp = p.data().data();
      for (int o = 0; o < outer; ++o)
        std::memcpy(po + o * out_stride + off, pp + o * chunk,
                    chunk * sizeof(double));
      off += chunk;
    }
  }
  if (track) {
    std::vector<Tensor> pc = parts;
    Tensor oc = out;
    record([pc, oc, outer, inner, axis_total, axis]() mutable {
      if (!oc.has_grad()) return;
      const double* g = oc.grad().data();
      int out_stride = axis_total * inner;
      int off = 0;
      for (auto& p : pc) {
        int chunk = p.dim(axis) * inner;
        if (p.requires_grad()) {
          double* gp = p.grad().data();
          for (int o = 0; o < outer; ++o) {
            const double* gs = g + o * out_stride + off;
            double* gd = gp + o * chunk;
            for (int i = 0; i < chunk; ++i) gd[i] += gs[i];
          }
        }
        off += chunk;
      }
    });
  }
  return out;
}

Tensor Graph::slice(const Tensor& a, int offset, int length) {
  if (a.rank() != 1)
    throw std::invalid_argument("slice: expected rank-1 input, got " +
                                shape_str(a.shape()));
  if (offset < 0 || length <= 0 || offset + length > a.dim(0))
    throw std::invalid_argument("slice: range [" + std::to_string(offset) +
                                "," + std::to_string(offset + length) +
                                ") out of bounds for " + shape_str(a.shape()));
  bool track = a.requires_grad();
  Tensor out = emit({length}, track);
  std::memcpy(out.data().data(), a.data().data() + offset,
              length * sizeof(double));
  if (track) {
    Tensor ac = a, oc = out;
    record([ac, oc, offset, length]() mutable {
      if (!oc.has_grad()) return;
      const double* g = oc.grad().data();
      double* ga = ac.grad().data();
      for (int i = 0; i < length; ++i) ga[offset + i] += g[i];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------

double finite_diff_check(const std::function<Tensor(Graph&, const Tensor&)>& f,
                         const Tensor& x0, double eps) {
  Tensor x = x0.clone();
  x.set_requires_grad(true);
  Graph g;
  Tensor y = f(g, x);
  if (y.numel() != 1)
    throw std::runtime_error("finite_diff_check: f must be scalar-valued");
  g.backward(y);
  std::vector<double> analytic(x.numel(), 0.0);
  if (x.has_grad()) analytic = x.grad();
  double max_err = 0.0;
  for (int i = 0; i < x0.numel(); ++i) {
    Tensor xp = x0.clone();
    xp.set_requires_grad(false);
    xp.data()[i] += eps;
    Graph gp;
    double fp = f(gp, xp).value();
    Tensor xm = x0.clone();
    xm.set_requires_grad(false);
    xm.data()[i] -= eps;
    Graph gm;
    double fm = f(gm, xm).value();
    double numeric = (fp - fm) / (2.0 * eps);
    double err = std::abs(analytic[i] - numeric) /
                 std::max(1.0, std::abs(numeric));
    max_err = std::max(max_err, err);
  }
  return max_err;
}

}  // namespace se3net
