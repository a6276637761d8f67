#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jmgt/state.hpp"

namespace jmgt {

namespace {

using Gauss = boost::math::quadrature::gauss<double, 10>;

}  // namespace

HistoryQuadrature::HistoryQuadrature(const MemoryKernel& kernel, int intervals, double s_max)
    : kernel_(kernel), intervals_(intervals), s_max_(s_max) {
  if (intervals < 2) throw std::invalid_argument("history grid needs at least two intervals");
  if (!(s_max > 0.0)) throw std::invalid_argument("history length must be positive");
  const double h = ds();
  for (int wi = 0; wi < 3; ++wi) {
    const auto w = static_cast<Weight>(wi);
    Set& set = sets_[wi];
    set.left.assign(intervals_, 0.0);
    set.right.assign(intervals_, 0.0);
    for (int i = 0; i < intervals_; ++i) {
      const double a = i * h;
      set.left[i] = Gauss::integrate(
          [&](double s) { return weight_value(w, s) * (1.0 - (s - a) / h); }, a, a + h);
      set.right[i] =
          Gauss::integrate([&](double s) { return weight_value(w, s) * ((s - a) / h); }, a, a + h);
    }
    set.nodal.assign(nodes(), 0.0);
    for (int i = 0; i < intervals_; ++i) {
      set.nodal[i] += set.left[i];
      set.nodal[i + 1] += set.right[i];
    }
    set.cumulative.assign(nodes(), 0.0);
    for (int i = intervals_ - 1; i >= 0; --i)
      set.cumulative[i] = set.cumulative[i + 1] + set.left[i] + set.right[i];
  }
  // Nodal -g' and g'' weights are backward differences of the g weights
  // (with W_{N+1} = 0), so that sum_j W_j (eta_{j-1} - eta_j) / ds equals
  // -sum_j W'_j eta_j exactly when eta_0 = 0.
  const auto diff = [&](const std::vector<double>& W) {
    std::vector<double> out(W.size());
    for (std::size_t j = 0; j < W.size(); ++j)
      out[j] = (W[j] - (j + 1 < W.size() ? W[j + 1] : 0.0)) / h;
    return out;
  };
  sets_[static_cast<int>(Weight::minus_dg)].nodal = diff(sets_[static_cast<int>(Weight::g)].nodal);
  sets_[static_cast<int>(Weight::d2g)].nodal = diff(sets_[static_cast<int>(Weight::minus_dg)].nodal);
}

double HistoryQuadrature::weight_value(Weight w, double s) const {
  const KernelValues v = kernel_.eval(s);
  switch (w) {
    case Weight::g:
      return v.g;
    case Weight::minus_dg:
      return -v.dg;
    case Weight::d2g:
      return v.d2g;
  }
  return 0.0;
}

const HistoryQuadrature::Set& HistoryQuadrature::set(Weight w) const {
  return sets_[static_cast<int>(w)];
}

const std::vector<double>& HistoryQuadrature::weights(Weight w) const { return set(w).nodal; }

double HistoryQuadrature::tail(Weight w, double a) const {
  const Set& st = set(w);
  if (a <= 0.0) return st.cumulative[0];
  if (a >= s_max_) return 0.0;
  const double h = ds();
  const int i = std::min(intervals_ - 1, static_cast<int>(std::floor(a / h)));
  const double b = (i + 1) * h;
  const double part = b > a ? Gauss::integrate([&](double s) { return weight_value(w, s); }, a, b) : 0.0;
  return part + st.cumulative[i + 1];
}

std::vector<double> HistoryQuadrature::weights_from(Weight w, double a) const {
  const Set& st = set(w);
  std::vector<double> out(nodes(), 0.0);
  if (a >= s_max_) return out;
  if (a < 0.0) a = 0.0;
  const double h = ds();
  const int i = std::min(intervals_ - 1, static_cast<int>(std::floor(a / h)));
  const double left = i * h, right = (i + 1) * h;
  if (right > a) {
    out[i] = Gauss::integrate(
        [&](double s) { return weight_value(w, s) * (1.0 - (s - left) / h); }, a, right);
    out[i + 1] = Gauss::integrate(
        [&](double s) { return weight_value(w, s) * ((s - left) / h); }, a, right);
  }
  for (int k = i + 1; k < intervals_; ++k) {
    out[k] += st.left[k];
    out[k + 1] += st.right[k];
  }
  return out;
}

// ---------------------------------------------------------------------------

HistoryField::HistoryField(const Grid& grid, std::shared_ptr<const HistoryQuadrature> quad)
    : grid_(grid), quad_(std::move(quad)) {
  if (!quad_) throw std::invalid_argument("history needs a quadrature");
  zeta_.assign(quad_->nodes(), Field(grid));
}

void HistoryField::set_jump(Field j, double front) {
  if (j.grid() != grid_) throw std::invalid_argument("jump field on a different grid");
  jump_ = std::move(j);
  front_ = front;
}

Field HistoryField::eta(std::size_t j) const {
  Field out = zeta_.at(j);
  if (beyond_front(j)) out += *jump_;
  return out;
}

void HistoryField::set_eta(std::size_t j, const Field& value) {
  Field z = value;
  if (beyond_front(j)) z -= *jump_;
  zeta_.at(j) = std::move(z);
}

Field HistoryField::memory_integral() const {
  Field out(grid_);
  const auto& W = quad_->weights(Weight::g);
  for (std::size_t j = 1; j < zeta_.size(); ++j) out.axpy(W[j], zeta_[j]);
  if (has_jump()) out.axpy(quad_->tail(Weight::g, front_), *jump_);
  return out;
}

HistorySpectra history_spectra(const HistoryField& h) {
  HistorySpectra out;
  out.zeta.reserve(h.nodes());
  for (const auto& z : h.smooth()) out.zeta.push_back(forward(z));
  if (h.has_jump()) out.jump = forward(h.jump());
  out.front = h.front();
  out.quad = h.quadrature_ptr();
  return out;
}

double history_inner(const Grid& grid, const HistorySpectra& a, const HistorySpectra& b, Weight w,
                     const std::vector<double>& mult) {
  if (a.zeta.size() != b.zeta.size()) throw std::invalid_argument("history grids differ");
  const HistoryQuadrature& q = *a.quad;
  const auto& W = q.weights(w);
  double sum = 0.0;
  for (std::size_t j = 1; j < a.zeta.size(); ++j)
    sum += W[j] * spectral_inner(grid, a.zeta[j], b.zeta[j], mult);
  if (b.jump) {
    const auto P = q.weights_from(w, b.front);
    for (std::size_t j = 1; j < a.zeta.size(); ++j)
      if (P[j] != 0.0) sum += P[j] * spectral_inner(grid, a.zeta[j], *b.jump, mult);
  }
  if (a.jump) {
    const auto P = q.weights_from(w, a.front);
    for (std::size_t j = 1; j < b.zeta.size(); ++j)
      if (P[j] != 0.0) sum += P[j] * spectral_inner(grid, *a.jump, b.zeta[j], mult);
  }
  if (a.jump && b.jump)
    sum += q.tail(w, std::max(a.front, b.front)) * spectral_inner(grid, *a.jump, *b.jump, mult);
  return sum;
}

double history_cross(const Grid& grid, const HistorySpectra& a, const Spectrum& f, Weight w,
                     const std::vector<double>& mult) {
  const HistoryQuadrature& q = *a.quad;
  const auto& W = q.weights(w);
  double sum = 0.0;
  for (std::size_t j = 1; j < a.zeta.size(); ++j)
    sum += W[j] * spectral_inner(grid, a.zeta[j], f, mult);
  if (a.jump) sum += q.tail(w, a.front) * spectral_inner(grid, *a.jump, f, mult);
  return sum;
}

double history_weighted_norm(const HistoryField& h, Weight w, double kappa) {
  const HistorySpectra sp = history_spectra(h);
  const double v = history_inner(h.grid(), sp, sp, w, h.grid().homogeneous_weight(kappa));
  return std::sqrt(std::max(0.0, v));
}

double history_weighted_norm(const StateVector& s, Weight w, double kappa) {
  const auto* h = s.dafermos();
  if (!h) throw std::invalid_argument("weighted history norm needs a resolved (dafermos) history");
  return history_weighted_norm(*h, w, kappa);
}

}  // namespace jmgt
