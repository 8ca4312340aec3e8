#include "knudsenlab/evolution.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace knudsenlab {

std::string to_string(Scheme s) { return s == Scheme::exact_linear ? "exact_linear" : "strang_imex"; }

Scheme parse_scheme(const std::string& name) {
  if (name == "exact_linear") return Scheme::exact_linear;
  if (name == "strang_imex") return Scheme::strang_imex;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

ModePropagator::ModePropagator(const CMat& generator) : a_(generator) {
  Eigen::ComplexEigenSolver<CMat> es(generator);
  if (es.info() == Eigen::Success) {
    v_ = es.eigenvectors();
    Eigen::PartialPivLU<CMat> lu(v_);
    vinv_ = lu.inverse();
    const auto norm1 = [](const CMat& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); };
    condition_ = norm1(v_) * norm1(vinv_);
    diagonal_ = std::isfinite(condition_) && condition_ <= 1e8;
    mu_ = es.eigenvalues();
  } else {
    condition_ = std::numeric_limits<double>::infinity();
  }
  if (!diagonal_) {
    v_.resize(0, 0);
    vinv_.resize(0, 0);
  }
}

CVec ModePropagator::apply(double t, const CVec& x) const {
  if (diagonal_) {
    const CVec c = vinv_ * x;
    return v_ * ((t * mu_).array().exp() * c.array()).matrix();
  }
  return matrix(t) * x;
}

CVec ModePropagator::to_eigen(const CVec& x) const { return vinv_ * x; }

CVec ModePropagator::from_eigen(double t, const CVec& c) const {
  return v_ * ((t * mu_).array().exp() * c.array()).matrix();
}

CVec ModePropagator::integral(double t, const CVec& x) const {
  const Eigen::Index n = a_.rows();
  if (diagonal_) {
    CVec c = vinv_ * x;
    for (Eigen::Index i = 0; i < n; ++i) {
      const cplx z = t * mu_(i);
      // (e^z - 1) / z, with the Taylor form where the quotient cancels
      const cplx phi = std::abs(z) < 1e-6 ? 1.0 + z / 2.0 + z * z / 6.0 : (std::exp(z) - 1.0) / z;
      c(i) *= t * phi;
    }
    return v_ * c;
  }
  CMat aug = CMat::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = a_;
  aug.topRightCorner(n, 1) = x;
  return CMat(t * aug).exp().topRightCorner(n, 1);
}

CMat ModePropagator::matrix(double t) const {
  if (diagonal_) return v_ * (t * mu_).array().exp().matrix().asDiagonal() * vinv_;
  return CMat(t * a_).exp();
}

CMat mode_generator(const CollisionModel& model, const Wavenumber& n, double eps, bool transport, bool collision) {
  if (!(eps > 0.0)) throw std::invalid_argument("mode_generator: eps must be positive");
  const int size = model.basis->size();
  CMat a = CMat::Zero(size, size);
  if (collision) a += (model.collision / (eps * eps)).cast<cplx>();
  if (transport) {
    const RMat vn = transport_symbol(*model.basis, {static_cast<double>(n[0]), static_cast<double>(n[1])});
    a += cplx(0.0, -1.0 / eps) * vn.cast<cplx>();
  }
  return a;
}

double hkx_l2_norm_squared(const SpectralField& h, int k) {
  const int dim = h.grid.dim_x;
  const auto ls = multi_indices_upto(dim, k);
  double total = 0.0;
  for (int m : active_modes(h)) {
    const Wavenumber n = h.grid.wavenumber(m);
    double w = 0.0;
    for (const auto& l : ls) w += std::norm(fourier_symbol(n, l, dim));
    total += w * h.coeffs.col(m).squaredNorm();
  }
  return total;
}

namespace {

bool canonical(const Wavenumber& n) { return n[0] > 0 || (n[0] == 0 && n[1] >= 0); }

// Propagators for canonical modes; the mirror mode uses exp(t conj A) x = conj(exp(t A) conj x).
class PropagatorCache {
 public:
  PropagatorCache(const CollisionModel& model, double eps, const IntegratorConfig& cfg)
      : model_(model), eps_(eps), cfg_(cfg) {}

  const ModePropagator& get(const Wavenumber& n) {
    auto it = cache_.find(n);
    if (it == cache_.end())
      it = cache_.emplace(n, ModePropagator(mode_generator(model_, n, eps_, cfg_.transport, cfg_.collision))).first;
    return it->second;
  }

  CMat generator(const Wavenumber& n) const {
    return mode_generator(model_, n, eps_, cfg_.transport, cfg_.collision);
  }

  CVec apply(const Wavenumber& n, double t, const CVec& x) {
    if (canonical(n)) return get(n).apply(t, x);
    return get({-n[0], -n[1]}).apply(t, x.conjugate()).conjugate();
  }

 private:
  const CollisionModel& model_;
  double eps_;
  const IntegratorConfig& cfg_;
  std::map<Wavenumber, ModePropagator> cache_;
};

// Step matrices exp(tau A) for a fixed tau, by Pade scaling and squaring (a 121-slot
// eigendecomposition costs about 20 times more than one fixed-step exponential).
class StepCache {
 public:
  StepCache(PropagatorCache& props, double tau) : props_(props), tau_(tau) {}

  CVec apply(const Wavenumber& n, const CVec& x) {
    const bool canon = canonical(n);
    const Wavenumber key = canon ? n : Wavenumber{-n[0], -n[1]};
    auto it = steps_.find(key);
    if (it == steps_.end()) it = steps_.emplace(key, CMat(tau_ * props_.generator(key)).exp()).first;
    if (canon) return it->second * x;
    return (it->second * x.conjugate()).conjugate();
  }

 private:
  PropagatorCache& props_;
  double tau_;
  std::map<Wavenumber, CMat> steps_;
};

void linear_step(StepCache& steps, SpectralField& h, const std::vector<int>& modes) {
  for (int m : modes) h.coeffs.col(m) = steps.apply(h.grid.wavenumber(m), h.coeffs.col(m));
}

double collision_form(const CollisionModel& model, const SpectralField& h) {
  double total = 0.0;
  for (int m : active_modes(h)) {
    const CVec hn = h.coeffs.col(m);
    const CVec lh = real_times(model.collision, hn);
    total += hn.dot(lh).real();
  }
  return total;
}

double truncation_loss(const SpectralField& h) {
  const VelocityBasis& b = *h.basis;
  double total = 0.0;
  for (int m : active_modes(h)) {
    const Wavenumber n = h.grid.wavenumber(m);
    for (int s = 0; s < b.size(); ++s) {
      if (b.degree(s) != b.order) continue;
      const MultiIndex a = b.index[static_cast<std::size_t>(s)];
      for (int i = 0; i < h.grid.dim_x && i < b.dim_v; ++i)
        total += double(n[static_cast<std::size_t>(i)]) * n[static_cast<std::size_t>(i)] *
                 (a[static_cast<std::size_t>(i)] + 1) * std::norm(h.coeffs(s, m));
    }
  }
  return total;
}

struct Recorder {
  const CollisionModel& model;
  double eps;
  const IntegratorConfig& cfg;
  std::optional<HypNormEvaluator> hyp, perp;
  TrajectoryRecord& rec;
  int samples = 0;

  void operator()(double t, const SpectralField& h) {
    if (!h.coeffs.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite state at t = " << t;
      throw NumericalFailure(msg.str(), t);
    }
    rec.times.push_back(t);
    rec.norms["L2"].push_back(std::sqrt(norm_squared(h, NormKind::L2)));
    rec.norms["Hk"].push_back(std::sqrt(norm_squared(h, NormKind::Hk, cfg.k)));
    rec.norms["HkLambda"].push_back(std::sqrt(norm_squared(h, NormKind::Lambda, cfg.k, 1.0, &model.lambda_weights)));
    rec.norms["HkxL2"].push_back(std::sqrt(hkx_l2_norm_squared(h, cfg.k)));
    if (hyp) rec.norms["HypEps"].push_back(std::sqrt(std::max(0.0, (*hyp)(h, eps))));
    if (perp) rec.norms["HypPerp"].push_back(std::sqrt(std::max(0.0, (*perp)(h, eps))));
    rec.collision_form.push_back(collision_form(model, h));
    if (cfg.nonlinear) {
      const SpectralField g = apply_gamma(model, h, h);
      rec.gamma_form.push_back((h.coeffs.conjugate().cwiseProduct(g.coeffs)).sum().real());
    } else {
      rec.gamma_form.push_back(0.0);
    }
    const RMat kt = model.kernel.transpose();
    const RVec mean = kt * h.coeffs.col(h.grid.zero_mode()).real();
    rec.kernel_moments.emplace_back(mean.data(), mean.data() + mean.size());
    rec.truncation_loss.push_back(truncation_loss(h));
    if (cfg.record_moments) {
      rec.moment_times.push_back(t);
      rec.moments.push_back(extract_moments(h));
    }
    if (cfg.state_every > 0 && samples % cfg.state_every == 0) {
      rec.state_times.push_back(t);
      rec.states.push_back(h);
    }
    ++samples;
  }
};

void validate(const IntegratorConfig& cfg, const CollisionModel& model, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("propagate: eps must be positive");
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("propagate: dt must be positive");
  if (!(cfg.t_end >= 0.0)) throw std::invalid_argument("propagate: t_end must be nonnegative");
  if (cfg.sample_every < 1) throw std::invalid_argument("propagate: sample_every must be >= 1");
  if (cfg.k < 0) throw std::invalid_argument("propagate: k must be >= 0");
  if (cfg.nonlinear && cfg.scheme != Scheme::strang_imex)
    throw std::invalid_argument("propagate: nonlinear runs need scheme strang_imex");
  if (cfg.nonlinear && !model.has_gamma())
    throw std::invalid_argument("propagate: model " + to_string(model.kind) + " has no bilinear term");
  if (cfg.scheme == Scheme::strang_imex && !(cfg.c_nl > 0.0))
    throw std::invalid_argument("propagate: c_nl must be positive");
}

}  // namespace

TrajectoryRecord propagate(const SpectralField& h_in, const CollisionModel& model, double eps,
                           const IntegratorConfig& cfg) {
  validate(cfg, model, eps);
  if (!h_in.coeffs.allFinite()) throw NumericalFailure("non-finite initial data", 0.0);
  TrajectoryRecord rec;
  rec.eps = eps;
  rec.k = cfg.k;
  rec.nonlinear = cfg.nonlinear;
  Recorder record{model, eps, cfg, std::nullopt, std::nullopt, rec};
  if (cfg.hyp_standard && eps <= cfg.hyp_standard->eps_max) record.hyp.emplace(*cfg.hyp_standard, model);
  if (cfg.hyp_perp && eps <= cfg.hyp_perp->eps_max) record.perp.emplace(*cfg.hyp_perp, model);

  if (cfg.nonlinear) {
    const double size = std::sqrt(norm_squared(h_in, NormKind::Hk, cfg.k));
    if (size > cfg.delta_k) {
      std::ostringstream msg;
      msg << "initial Hk norm " << size << " exceeds delta_k = " << cfg.delta_k;
      rec.warnings.push_back(msg.str());
    }
  }

  double dt = cfg.dt;
  if (cfg.scheme == Scheme::strang_imex) dt = std::min(dt, cfg.c_nl * eps);
  const long steps = cfg.t_end > 0.0 ? std::max(1L, static_cast<long>(std::ceil(cfg.t_end / dt - 1e-9))) : 0L;
  dt = steps > 0 ? cfg.t_end / static_cast<double>(steps) : 0.0;

  PropagatorCache props(model, eps, cfg);
  SpectralField h = h_in;
  record(0.0, h);

  if (cfg.scheme == Scheme::exact_linear) {
    // Eigen-coordinates of the data are computed once per mode.
    struct Track {
      int m;
      Wavenumber n;
      bool mirrored;
      const ModePropagator* p;
      CVec c;
    };
    std::vector<Track> tracks;
    for (int m : active_modes(h_in)) {
      const Wavenumber n = h.grid.wavenumber(m);
      const bool mirrored = !canonical(n);
      const ModePropagator& p = props.get(mirrored ? Wavenumber{-n[0], -n[1]} : n);
      const CVec x = mirrored ? CVec(h_in.coeffs.col(m).conjugate()) : CVec(h_in.coeffs.col(m));
      tracks.push_back({m, n, mirrored, &p, p.diagonalized() ? p.to_eigen(x) : x});
    }
    for (long s = 1; s <= steps; ++s) {
      if (s % cfg.sample_every != 0 && s != steps) continue;
      const double t = static_cast<double>(s) * dt;
      for (const auto& tr : tracks) {
        const CVec y = tr.p->diagonalized() ? tr.p->from_eigen(t, tr.c) : tr.p->apply(t, tr.c);
        h.coeffs.col(tr.m) = tr.mirrored ? CVec(y.conjugate()) : y;
      }
      record(t, h);
    }
  } else {
    StepCache half(props, 0.5 * dt);
    std::vector<int> all(static_cast<std::size_t>(h.grid.modes()));
    for (int m = 0; m < h.grid.modes(); ++m) all[static_cast<std::size_t>(m)] = m;
    for (long s = 1; s <= steps; ++s) {
      const double t = static_cast<double>(s) * dt;
      if (cfg.nonlinear) {
        linear_step(half, h, all);
        SpectralField mid = h;
        mid.coeffs += (0.5 * dt / eps) * apply_gamma(model, h, h).coeffs;
        h.coeffs += (dt / eps) * apply_gamma(model, mid, mid).coeffs;
        linear_step(half, h, all);
      } else {
        const std::vector<int> modes = active_modes(h);
        linear_step(half, h, modes);
        linear_step(half, h, modes);
      }
      if (!h.coeffs.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite state at t = " << t;
        throw NumericalFailure(msg.str(), t);
      }
      if (s % cfg.sample_every == 0 || s == steps) record(t, h);
    }
  }
  rec.final_state = h;
  return rec;
}

DecayFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& norm, double t0, double t1) {
  if (times.size() != norm.size()) throw std::invalid_argument("fit_decay_rate: size mismatch");
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t0 || times[i] > t1) continue;
    if (!(norm[i] > 0.0)) {
      std::ostringstream msg;
      msg << "fit_decay_rate: nonpositive norm " << norm[i] << " at t = " << times[i];
      throw std::invalid_argument(msg.str());
    }
    ts.push_back(times[i]);
    ys.push_back(std::log(norm[i]));
  }
  if (ts.size() < 5) throw std::invalid_argument("fit_decay_rate: fewer than 5 samples in window");
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
  }
  if (!(stt > 0.0)) throw std::invalid_argument("fit_decay_rate: degenerate time window");
  const double slope = sty / stt;
  double rss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (my + slope * (ts[i] - mt));
    rss += r * r;
  }
  return {-slope, std::sqrt(rss / n), static_cast<int>(ts.size())};
}

DecayFit fit_decay_rate(const TrajectoryRecord& record, const std::string& norm_key, double t0, double t1) {
  return fit_decay_rate(record.times, record.norm(norm_key), t0, t1);
}

}  // namespace knudsenlab
