#pragma once

// Uniform periodic grids on the d-torus (d = 1, 2, 3) with trapezoidal
// quadrature and Fourier-collocation calculus. Differentiation multiplies by
// i*2*pi*k in frequency space with the Nyquist mode zeroed (keeps derivatives
// of real data real); on smooth periodic data both quadrature and derivatives
// are accurate to machine precision once the field is resolved.
//
// Fields are immutable after construction by convention; every operation here
// is a pure function, safe for unrestricted concurrent use. FFTW plans are
// cached per grid signature behind a mutex and executed through the
// thread-safe new-array interface.

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "mfgh/common.hpp"
#include "mfgh/errors.hpp"

namespace mfgh {

struct TorusGrid {
  int d = 1;   // dimension, 1..3
  int n = 8;   // points per axis, even, >= 8
  double h = 0.125;  // spacing 1/n

  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < d; ++a) s *= static_cast<std::size_t>(n);
    return s;
  }
  double cell_weight() const {
    double w = 1.0;
    for (int a = 0; a < d; ++a) w *= h;
    return w;
  }
  // Row-major flattening, axis 0 slowest.
  void unflatten(std::size_t idx, int* k) const {
    for (int a = d - 1; a >= 0; --a) {
      k[a] = static_cast<int>(idx % static_cast<std::size_t>(n));
      idx /= static_cast<std::size_t>(n);
    }
  }
  std::size_t flatten(const int* k) const {
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a)
      idx = idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(k[a]);
    return idx;
  }
  void node(std::size_t idx, double* x) const {
    int k[3] = {0, 0, 0};
    unflatten(idx, k);
    for (int a = 0; a < d; ++a) x[a] = k[a] * h;
  }
  bool operator==(const TorusGrid& o) const { return d == o.d && n == o.n; }
};

inline TorusGrid make_grid(int d, int n) {
  require(d >= 1 && d <= 3, errc::bad_dimension,
          "dimension must be 1, 2, or 3, got " + std::to_string(d));
  require(n % 2 == 0, errc::odd_grid_size,
          "points per axis must be even, got " + std::to_string(n));
  require(n >= 8, errc::grid_too_small,
          "points per axis must be >= 8, got " + std::to_string(n));
  return TorusGrid{d, n, 1.0 / n};
}

struct ScalarField {
  TorusGrid grid;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const TorusGrid& g) : grid(g), values(g.size(), 0.0) {}
  ScalarField(const TorusGrid& g, std::vector<double> v)
      : grid(g), values(std::move(v)) {
    require(values.size() == grid.size(), errc::bad_dimension,
            "value count does not match grid size");
  }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
};

struct VectorField {
  TorusGrid grid;
  std::array<std::vector<double>, 3> comp;  // first grid.d entries used

  VectorField() = default;
  explicit VectorField(const TorusGrid& g) : grid(g) {
    for (int a = 0; a < g.d; ++a) comp[a].assign(g.size(), 0.0);
  }
  std::vector<double>& operator[](int a) { return comp[a]; }
  const std::vector<double>& operator[](int a) const { return comp[a]; }
};

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

namespace detail {

// Signed wavenumber of mode j on an n-point axis, Nyquist zeroed.
inline int wavenumber(int j, int n) {
  if (j < n / 2) return j;
  if (j == n / 2) return 0;
  return j - n;
}

struct FftPlan {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<std::complex<double>> a, b;  // planning buffers, kept alive

  ~FftPlan() {
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
  }
};

// Plan creation is not thread-safe in FFTW; executions through
// fftw_execute_dft are. Plans use FFTW_UNALIGNED so arbitrary buffers work.
inline FftPlan& plan_for(const TorusGrid& g) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<FftPlan>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(g.d, g.n);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  auto plan = std::make_unique<FftPlan>();
  plan->a.resize(g.size());
  plan->b.resize(g.size());
  int dims[3] = {g.n, g.n, g.n};
  auto* pa = reinterpret_cast<fftw_complex*>(plan->a.data());
  auto* pb = reinterpret_cast<fftw_complex*>(plan->b.data());
  plan->fwd = fftw_plan_dft(g.d, dims, pa, pb, FFTW_FORWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan->bwd = fftw_plan_dft(g.d, dims, pa, pb, FFTW_BACKWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
  auto& ref = *plan;
  cache[key] = std::move(plan);
  return ref;
}

inline void fft_forward(const TorusGrid& g, std::complex<double>* in,
                        std::complex<double>* out) {
  auto& p = plan_for(g);
  fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(in),
                   reinterpret_cast<fftw_complex*>(out));
}

// Unnormalized inverse; caller divides by grid.size().
inline void fft_backward(const TorusGrid& g, std::complex<double>* in,
                         std::complex<double>* out) {
  auto& p = plan_for(g);
  fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(in),
                   reinterpret_cast<fftw_complex*>(out));
}

inline std::vector<std::complex<double>> to_complex(
    const std::vector<double>& v) {
  std::vector<std::complex<double>> c(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) c[i] = v[i];
  return c;
}

// Forward DFT coefficients of a real field, normalized by 1/N.
inline std::vector<std::complex<double>> spectrum(const ScalarField& f) {
  auto in = to_complex(f.values);
  std::vector<std::complex<double>> out(in.size());
  fft_forward(f.grid, in.data(), out.data());
  const double inv = 1.0 / static_cast<double>(f.grid.size());
  for (auto& c : out) c *= inv;
  return out;
}

inline std::vector<double> to_real(const TorusGrid& g,
                                   std::vector<std::complex<double>>& spec) {
  std::vector<std::complex<double>> out(spec.size());
  fft_backward(g, spec.data(), out.data());
  std::vector<double> r(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) r[i] = out[i].real();
  return r;
}

}  // namespace detail

// Compensated (Kahan) sum: keeps quadrature deterministic and accurate for
// the ~1e6-node fields used here.
inline double kahan_sum(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

// Trapezoidal rule on the periodic grid: h^d * sum of node values. Exact for
// trigonometric polynomials of per-axis degree < n/2.
inline double integrate(const ScalarField& f) {
  require(all_finite(f.values), errc::non_finite_input,
          "integrate: field has non-finite values");
  return f.grid.cell_weight() * kahan_sum(f.values);
}

inline ScalarField project_mean_zero(const ScalarField& u) {
  const double mean = integrate(u);  // unit torus volume
  ScalarField out = u;
  for (double& v : out.values) v -= mean;
  return out;
}

// Fourier-collocation gradient; exact for grid-resolved trig polynomials.
inline VectorField gradient(const ScalarField& u) {
  const TorusGrid& g = u.grid;
  auto uin = detail::to_complex(u.values);
  std::vector<std::complex<double>> uhat(uin.size());
  detail::fft_forward(g, uin.data(), uhat.data());

  VectorField out(g);
  const double invN = 1.0 / static_cast<double>(g.size());
  std::vector<std::complex<double>> dhat(uhat.size());
  int k[3];
  for (int a = 0; a < g.d; ++a) {
    for (std::size_t i = 0; i < uhat.size(); ++i) {
      g.unflatten(i, k);
      const double kk = kTwoPi * detail::wavenumber(k[a], g.n);
      dhat[i] = uhat[i] * std::complex<double>(0.0, kk) * invN;
    }
    std::vector<std::complex<double>> back(dhat.size());
    detail::fft_backward(g, dhat.data(), back.data());
    for (std::size_t i = 0; i < back.size(); ++i) out.comp[a][i] = back[i].real();
  }
  return out;
}

// Single-axis spectral derivative.
inline ScalarField derivative(const ScalarField& u, int axis) {
  const TorusGrid& g = u.grid;
  require(axis >= 0 && axis < g.d, errc::bad_dimension, "derivative: bad axis");
  auto uin = detail::to_complex(u.values);
  std::vector<std::complex<double>> uhat(uin.size());
  detail::fft_forward(g, uin.data(), uhat.data());
  const double invN = 1.0 / static_cast<double>(g.size());
  int k[3];
  for (std::size_t i = 0; i < uhat.size(); ++i) {
    g.unflatten(i, k);
    const double kk = kTwoPi * detail::wavenumber(k[axis], g.n);
    uhat[i] *= std::complex<double>(0.0, kk) * invN;
  }
  auto vals = detail::to_real(g, uhat);
  return ScalarField(g, std::move(vals));
}

// Spectral divergence; adjoint-consistent with gradient:
// integrate(u * divergence(w)) == -integrate(grad u . w) to machine precision.
inline ScalarField divergence(const VectorField& w) {
  const TorusGrid& g = w.grid;
  std::vector<std::complex<double>> acc(g.size(), {0.0, 0.0});
  std::vector<std::complex<double>> what(g.size());
  int k[3];
  for (int a = 0; a < g.d; ++a) {
    std::vector<std::complex<double>> win(g.size());
    for (std::size_t i = 0; i < win.size(); ++i) win[i] = w.comp[a][i];
    detail::fft_forward(g, win.data(), what.data());
    for (std::size_t i = 0; i < what.size(); ++i) {
      g.unflatten(i, k);
      const double kk = kTwoPi * detail::wavenumber(k[a], g.n);
      acc[i] += what[i] * std::complex<double>(0.0, kk);
    }
  }
  const double invN = 1.0 / static_cast<double>(g.size());
  for (auto& c : acc) c *= invN;
  auto vals = detail::to_real(g, acc);
  return ScalarField(g, std::move(vals));
}

// Antiderivative along one axis with the k_axis = 0 plane zeroed: the result
// has zero mean along every line in that axis direction. Requires the input
// to be mean-zero along those lines (true for spectral derivatives and for
// flux mismatches handled here); any residual mean is discarded.
inline ScalarField antiderivative_mean_zero(const ScalarField& f, int axis) {
  const TorusGrid& g = f.grid;
  require(axis >= 0 && axis < g.d, errc::bad_dimension,
          "antiderivative: bad axis");
  auto fin = detail::to_complex(f.values);
  std::vector<std::complex<double>> fhat(fin.size());
  detail::fft_forward(g, fin.data(), fhat.data());
  const double invN = 1.0 / static_cast<double>(g.size());
  int k[3];
  for (std::size_t i = 0; i < fhat.size(); ++i) {
    g.unflatten(i, k);
    const int kk = detail::wavenumber(k[axis], g.n);
    if (kk == 0) {
      fhat[i] = 0.0;
    } else {
      fhat[i] /= std::complex<double>(0.0, kTwoPi * kk);
    }
    fhat[i] *= invN;
  }
  auto vals = detail::to_real(g, fhat);
  return ScalarField(g, std::move(vals));
}

inline double linf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double l2_norm(const ScalarField& f) {
  double s = 0.0;
  for (double x : f.values) s += x * x;
  return std::sqrt(f.grid.cell_weight() * s);
}

// Trigonometric interpolation of a sampled field at arbitrary points.
// Nyquist modes are kept as pure cosine content (real part of e^{i pi n x}),
// the standard symmetric convention for real data.
class SpectralInterpolant {
 public:
  explicit SpectralInterpolant(const ScalarField& f)
      : grid_(f.grid), coeff_(detail::spectrum(f)) {}

  double operator()(const double* x) const {
    std::complex<double> acc(0.0, 0.0);
    int k[3];
    for (std::size_t i = 0; i < coeff_.size(); ++i) {
      grid_.unflatten(i, k);
      double phase = 0.0;
      for (int a = 0; a < grid_.d; ++a) {
        int kk = (k[a] == grid_.n / 2) ? grid_.n / 2
                                       : detail::wavenumber(k[a], grid_.n);
        phase += kTwoPi * kk * x[a];
      }
      acc += coeff_[i] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return acc.real();
  }
  double operator()(double x) const { return (*this)(&x); }

 private:
  TorusGrid grid_;
  std::vector<std::complex<double>> coeff_;
};

// Random band-limited field: trig polynomial with per-axis modes <= max_mode,
// coefficients uniform in [-amplitude, amplitude]. Smooth, grid-resolved,
// mean-zero; used for random restarts in the uniqueness checks.
inline ScalarField random_trig_field(const TorusGrid& g, double amplitude,
                                     int max_mode, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&rng]() {
    return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  };
  ScalarField out(g);
  // modes: all k in [0, max_mode]^d except the zero mode, cos and sin parts
  int kmax = std::min(max_mode, g.n / 2 - 1);
  std::vector<std::array<int, 3>> modes;
  int lim = kmax + 1;
  for (int k0 = 0; k0 < (g.d > 0 ? lim : 1); ++k0)
    for (int k1 = 0; k1 < (g.d > 1 ? lim : 1); ++k1)
      for (int k2 = 0; k2 < (g.d > 2 ? lim : 1); ++k2) {
        if (k0 == 0 && k1 == 0 && k2 == 0) continue;
        modes.push_back({k0, k1, k2});
      }
  std::vector<double> ca(modes.size()), cb(modes.size());
  for (std::size_t m = 0; m < modes.size(); ++m) {
    ca[m] = amplitude * uni();
    cb[m] = amplitude * uni();
  }
  double x[3] = {0, 0, 0};
  for (std::size_t i = 0; i < out.size(); ++i) {
    g.node(i, x);
    double v = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      double phase = 0.0;
      for (int a = 0; a < g.d; ++a) phase += kTwoPi * modes[m][a] * x[a];
      v += ca[m] * std::cos(phase) + cb[m] * std::sin(phase);
    }
    out[i] = v;
  }
  return out;
}

}  // namespace mfgh
