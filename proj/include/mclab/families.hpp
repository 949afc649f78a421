#pragma once

// Analytic test-function families sampled onto a Domain.
//
// Every corpus family is compactly supported in a Euclidean ball around its
// centre. The profiles use a degree-9 polynomial smoothstep (C^4 at both ends)
// as cutoff, so derivatives up to order 4 are continuous.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mclab/error.hpp"
#include "mclab/grid.hpp"

namespace mclab {

enum class FamilyKind {
  gaussian_bump,
  smooth_plateau,
  modulated_bump,
  multi_bump,
  concentration,
  random_fourier,
  zero,
  constant,    // synthetic, margin waived
  polynomial,  // synthetic, margin waived
};

inline const char* to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::gaussian_bump: return "gaussian_bump";
    case FamilyKind::smooth_plateau: return "smooth_plateau";
    case FamilyKind::modulated_bump: return "modulated_bump";
    case FamilyKind::multi_bump: return "multi_bump";
    case FamilyKind::concentration: return "concentration";
    case FamilyKind::random_fourier: return "random_fourier";
    case FamilyKind::zero: return "zero";
    case FamilyKind::constant: return "constant";
    case FamilyKind::polynomial: return "polynomial";
  }
  return "?";
}

inline FamilyKind family_kind_from_string(const std::string& s) {
  for (FamilyKind k : {FamilyKind::gaussian_bump, FamilyKind::smooth_plateau, FamilyKind::modulated_bump,
                       FamilyKind::multi_bump, FamilyKind::concentration, FamilyKind::random_fourier,
                       FamilyKind::zero, FamilyKind::constant, FamilyKind::polynomial})
    if (s == to_string(k)) return k;
  throw ValidationError("family_kind", "unknown family '" + s + "'");
}

namespace profile {

/// 1 − (126t⁵ − 420t⁶ + 540t⁷ − 315t⁸ + 70t⁹): falls from 1 at t ≤ 0 to 0 at t ≥ 1.
inline double smooth_step(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double t5 = t * t * t * t * t;
  return 1.0 - t5 * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + 70.0 * t))));
}

/// Gaussian truncation: 1 up to t = 3/4, smooth step to 0 at t = 1.
inline double cutoff(double t) { return smooth_step((t - 0.75) / 0.25); }

/// Bound on |smooth_step'| and |smooth_step''| over [0,1].
inline constexpr double kStepSlope = 2.4609375;   // 315/128 at t = 1/2
inline constexpr double kStepCurvature = 9.6;     // rounded-up maximum of |s''|

}  // namespace profile

struct Bump {
  Point center{0.0, 0.0};
  double width = 1.0;
  double amplitude = 1.0;
};

struct FourierMode {
  std::array<double, 2> wavevector{0.0, 0.0};  // radians per unit length
  double phase = 0.0;
  double coefficient = 0.0;
};

/// One corpus family with its parameters. Only the keys that belong to `kind`
/// are meaningful; `dilation` s gives f_s(x) = f(x/s).
struct CorpusFamily {
  FamilyKind kind = FamilyKind::gaussian_bump;
  std::vector<double> center{0.0};
  double width = 0.5;
  double amplitude = 1.0;
  double inner_radius = 0.5;
  double outer_radius = 1.0;
  std::vector<double> wavevector{0.0};
  double phase = 0.0;
  int count = 3;
  double spread = 1.0;
  double radius = 1.5;
  int modes = 4;
  int max_mode = 4;
  double value = 1.0;
  std::vector<double> coefficients;
  std::optional<std::uint64_t> seed;
  double dilation = 1.0;

  bool synthetic() const noexcept { return kind == FamilyKind::constant || kind == FamilyKind::polynomial; }
};

namespace detail {

inline double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

inline Point center_point(const CorpusFamily& f) {
  Point c{0.0, 0.0};
  for (std::size_t a = 0; a < f.center.size() && a < 2; ++a) c[a] = f.center[a];
  return c;
}

inline double distance(const Point& x, const Point& c, int dim) {
  const double d0 = x[0] - c[0];
  const double d1 = dim == 2 ? x[1] - c[1] : 0.0;
  return std::sqrt(d0 * d0 + d1 * d1);
}

inline std::vector<Bump> multi_bumps(const CorpusFamily& f, int dim) {
  std::mt19937_64 gen(f.seed.value_or(0));
  const Point c = center_point(f);
  std::vector<Bump> out;
  for (int b = 0; b < f.count; ++b) {
    Point off{0.0, 0.0};
    for (;;) {
      off[0] = (2.0 * uniform01(gen) - 1.0) * f.spread;
      off[1] = dim == 2 ? (2.0 * uniform01(gen) - 1.0) * f.spread : 0.0;
      if (off[0] * off[0] + off[1] * off[1] <= f.spread * f.spread) break;
    }
    Bump bump;
    bump.center = {c[0] + off[0], c[1] + off[1]};
    bump.width = f.width * (0.75 + 0.5 * uniform01(gen));
    const double sign = uniform01(gen) < 0.5 ? -1.0 : 1.0;
    bump.amplitude = f.amplitude * sign * (0.5 + 0.5 * uniform01(gen));
    out.push_back(bump);
  }
  return out;
}

inline std::vector<FourierMode> fourier_modes(const CorpusFamily& f, int dim, double half_width) {
  std::mt19937_64 gen(f.seed.value_or(0));
  std::vector<FourierMode> out;
  double total = 0.0;
  const double base = std::numbers::pi / half_width;
  for (int j = 0; j < f.modes; ++j) {
    FourierMode m;
    auto draw_mode = [&](int lo) {
      return lo + static_cast<int>(uniform01(gen) * (f.max_mode - lo + 1));
    };
    if (dim == 1) {
      m.wavevector = {base * draw_mode(1), 0.0};
    } else {
      int m0 = 0, m1 = 0;
      while (m0 == 0 && m1 == 0) {
        m0 = draw_mode(-f.max_mode);
        m1 = draw_mode(-f.max_mode);
      }
      m.wavevector = {base * m0, base * m1};
    }
    m.phase = 2.0 * std::numbers::pi * uniform01(gen);
    m.coefficient = 2.0 * uniform01(gen) - 1.0;
    total += std::abs(m.coefficient);
    out.push_back(m);
  }
  if (total > 0.0)
    for (FourierMode& m : out) m.coefficient /= total;
  return out;
}

inline int polynomial_basis_size(int dim, int degree) {
  return dim == 1 ? degree + 1 : (degree + 1) * (degree + 2) / 2;
}

/// Monomials x^a y^b in graded order: 1, x, y, x², xy, y², ...
inline double polynomial_value(const std::vector<double>& coef, int dim, const Point& x) {
  double s = 0.0;
  std::size_t idx = 0;
  for (int deg = 0; idx < coef.size(); ++deg) {
    if (dim == 1) {
      s += coef[idx++] * std::pow(x[0], deg);
      continue;
    }
    for (int b = 0; b <= deg && idx < coef.size(); ++b)
      s += coef[idx++] * std::pow(x[0], deg - b) * std::pow(x[1], b);
  }
  return s;
}

}  // namespace detail

/// Radius of the ball around the (dilated) centre that contains the support.
inline double support_radius(const CorpusFamily& f) {
  double r = 0.0;
  switch (f.kind) {
    case FamilyKind::gaussian_bump:
    case FamilyKind::modulated_bump: r = 3.0 * f.width; break;
    case FamilyKind::smooth_plateau: r = f.outer_radius; break;
    case FamilyKind::multi_bump: r = f.spread + 3.0 * 1.25 * f.width; break;
    case FamilyKind::concentration: r = f.width; break;
    case FamilyKind::random_fourier: r = f.radius; break;
    case FamilyKind::zero: r = 0.0; break;
    case FamilyKind::constant:
    case FamilyKind::polynomial: r = std::numeric_limits<double>::infinity(); break;
  }
  return r * f.dilation;
}

/// Smallest length the sampled profile must resolve.
inline double feature_length(const CorpusFamily& f) {
  double l = std::numeric_limits<double>::infinity();
  switch (f.kind) {
    case FamilyKind::gaussian_bump:
    case FamilyKind::modulated_bump: l = f.width; break;
    case FamilyKind::smooth_plateau: l = f.outer_radius - f.inner_radius; break;
    case FamilyKind::multi_bump: l = 0.75 * f.width; break;
    case FamilyKind::concentration: l = 0.75 * f.width; break;
    case FamilyKind::random_fourier: l = 0.5 * f.radius; break;
    default: break;
  }
  return l * f.dilation;
}

/// Structural checks that do not depend on the grid.
inline void validate_family(const CorpusFamily& f) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError("family_parameter", std::string(what) + " must be positive");
  };
  positive(f.dilation, "dilation");
  if (f.center.empty() || f.center.size() > 2) throw ValidationError("family_parameter", "center must have 1 or 2 entries");
  switch (f.kind) {
    case FamilyKind::gaussian_bump:
    case FamilyKind::concentration: positive(f.width, "width"); break;
    case FamilyKind::modulated_bump:
      positive(f.width, "width");
      if (f.wavevector.empty() || f.wavevector.size() > 2)
        throw ValidationError("family_parameter", "wavevector must have 1 or 2 entries");
      break;
    case FamilyKind::smooth_plateau:
      positive(f.inner_radius, "inner_radius");
      if (!(f.outer_radius > f.inner_radius)) throw ValidationError("family_parameter", "outer_radius must exceed inner_radius");
      break;
    case FamilyKind::multi_bump:
      positive(f.width, "width");
      if (f.count < 2 || f.count > 5) throw ValidationError("family_parameter", "multi_bump count must be in [2, 5]");
      if (!(f.spread >= 0.0)) throw ValidationError("family_parameter", "spread must be non-negative");
      break;
    case FamilyKind::random_fourier:
      positive(f.radius, "radius");
      if (f.modes < 1) throw ValidationError("family_parameter", "modes must be >= 1");
      if (f.max_mode < 1) throw ValidationError("family_parameter", "max_mode must be >= 1");
      break;
    case FamilyKind::polynomial:
      if (f.coefficients.empty()) throw ValidationError("family_parameter", "polynomial needs coefficients");
      break;
    default: break;
  }
}

/// Evaluates a family on a domain. Throws ValidationError when the support
/// reaches the margin band, when the smallest feature is below 4h or when a
/// Fourier mode exceeds n/16 oscillations across the box.
inline GridFunction sample(const Domain& d, const CorpusFamily& f) {
  validate_family(f);
  const int N = d.dim();
  if (static_cast<int>(f.center.size()) != N)
    throw ValidationError("family_dimension", "center has " + std::to_string(f.center.size()) + " entries for N = " +
                                                  std::to_string(N));
  const double s = f.dilation;
  const Point c0 = detail::center_point(f);
  const Point c{c0[0] * s, c0[1] * s};
  if (!f.synthetic() && f.kind != FamilyKind::zero) {
    const double reach = std::max(std::abs(c[0]), std::abs(c[1])) + support_radius(f);
    const double inner = d.half_width() - d.support_margin();
    if (reach > inner + 1e-12)
      throw ValidationError("support_margin", std::string(to_string(f.kind)) + " support reaches |x|_inf = " +
                                                  std::to_string(reach) + " > L - m = " + std::to_string(inner));
    const double feature = feature_length(f);
    if (feature < 4.0 * d.spacing() * (1.0 - 1e-12))
      throw ValidationError("feature_resolution", std::string(to_string(f.kind)) + " feature " + std::to_string(feature) +
                                                      " is below 4h = " + std::to_string(4.0 * d.spacing()));
  }
  if (f.kind == FamilyKind::random_fourier && f.max_mode > s * d.points_per_axis() / 16.0 + 1e-12)
    throw ValidationError("frequency_limit", "max_mode " + std::to_string(f.max_mode) + " exceeds n/16 at dilation " +
                                                 std::to_string(s));
  if (f.kind == FamilyKind::modulated_bump) {
    double k2 = 0.0;
    for (double k : f.wavevector) k2 += k * k;
    const double wavelength = 2.0 * std::numbers::pi * s / std::sqrt(std::max(k2, 1e-300));
    if (wavelength < 16.0 * d.spacing() * (1.0 - 1e-12))
      throw ValidationError("frequency_limit", "carrier wavelength " + std::to_string(wavelength) + " is below 16h");
  }

  std::vector<Bump> bumps;
  if (f.kind == FamilyKind::multi_bump) bumps = detail::multi_bumps(f, N);
  std::vector<FourierMode> modes;
  if (f.kind == FamilyKind::random_fourier) modes = detail::fourier_modes(f, N, d.half_width());

  auto eval = [&](const Point& xs) -> double {
    // xs is already divided by the dilation.
    const double dist = detail::distance(xs, c0, N);
    switch (f.kind) {
      case FamilyKind::gaussian_bump:
        return f.amplitude * std::exp(-dist * dist / (2.0 * f.width * f.width)) * profile::cutoff(dist / (3.0 * f.width));
      case FamilyKind::smooth_plateau:
        return f.amplitude * profile::smooth_step((dist - f.inner_radius) / (f.outer_radius - f.inner_radius));
      case FamilyKind::modulated_bump: {
        double phase = f.phase;
        for (int a = 0; a < N && a < static_cast<int>(f.wavevector.size()); ++a) phase += f.wavevector[a] * (xs[a] - c0[a]);
        return f.amplitude * std::exp(-dist * dist / (2.0 * f.width * f.width)) *
               profile::cutoff(dist / (3.0 * f.width)) * std::cos(phase);
      }
      case FamilyKind::multi_bump: {
        double v = 0.0;
        for (const Bump& b : bumps) {
          const double db = detail::distance(xs, b.center, N);
          v += b.amplitude * std::exp(-db * db / (2.0 * b.width * b.width)) * profile::cutoff(db / (3.0 * b.width));
        }
        return v;
      }
      case FamilyKind::concentration:
        return f.amplitude * profile::smooth_step((dist - 0.25 * f.width) / (0.75 * f.width));
      case FamilyKind::random_fourier: {
        const double env = profile::smooth_step((dist - 0.5 * f.radius) / (0.5 * f.radius));
        if (env == 0.0) return 0.0;
        double v = 0.0;
        for (const FourierMode& m : modes)
          v += m.coefficient * std::cos(m.wavevector[0] * xs[0] + m.wavevector[1] * xs[1] + m.phase);
        return f.amplitude * env * v;
      }
      case FamilyKind::zero: return 0.0;
      case FamilyKind::constant: return f.value;
      case FamilyKind::polynomial: return detail::polynomial_value(f.coefficients, N, xs);
    }
    return 0.0;
  };

  std::vector<double> values(d.size(), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Point x = d.point(d.unflat(i));
    values[i] = eval({x[0] / s, x[1] / s});
  }
  GridFunction u(d, std::move(values));
  if (!f.synthetic() && !u.vanishes_on_margin())
    throw ValidationError("support_margin", "sampled values do not vanish on the margin band");
  return u;
}

inline CorpusFamily dilated(CorpusFamily f, double s) {
  if (!(s > 0.0)) throw ValidationError("dilation", "scale must be positive");
  f.dilation *= s;
  return f;
}

// --- JSON -------------------------------------------------------------------

namespace detail {

inline std::set<std::string> family_keys(FamilyKind k) {
  std::set<std::string> keys{"family", "center", "seed", "dilation"};
  switch (k) {
    case FamilyKind::gaussian_bump: keys.insert({"width", "amplitude"}); break;
    case FamilyKind::smooth_plateau: keys.insert({"inner_radius", "outer_radius", "amplitude"}); break;
    case FamilyKind::modulated_bump: keys.insert({"width", "amplitude", "wavevector", "phase"}); break;
    case FamilyKind::multi_bump: keys.insert({"count", "spread", "width", "amplitude"}); break;
    case FamilyKind::concentration: keys.insert({"width", "amplitude"}); break;
    case FamilyKind::random_fourier: keys.insert({"radius", "modes", "max_mode", "amplitude"}); break;
    case FamilyKind::zero: break;
    case FamilyKind::constant: keys.insert("value"); break;
    case FamilyKind::polynomial: keys.insert("coefficients"); break;
  }
  return keys;
}

}  // namespace detail

inline nlohmann::json to_json(const CorpusFamily& f) {
  nlohmann::json j;
  j["family"] = to_string(f.kind);
  j["center"] = f.center;
  switch (f.kind) {
    case FamilyKind::gaussian_bump:
    case FamilyKind::concentration:
      j["width"] = f.width;
      j["amplitude"] = f.amplitude;
      break;
    case FamilyKind::smooth_plateau:
      j["inner_radius"] = f.inner_radius;
      j["outer_radius"] = f.outer_radius;
      j["amplitude"] = f.amplitude;
      break;
    case FamilyKind::modulated_bump:
      j["width"] = f.width;
      j["amplitude"] = f.amplitude;
      j["wavevector"] = f.wavevector;
      j["phase"] = f.phase;
      break;
    case FamilyKind::multi_bump:
      j["count"] = f.count;
      j["spread"] = f.spread;
      j["width"] = f.width;
      j["amplitude"] = f.amplitude;
      break;
    case FamilyKind::random_fourier:
      j["radius"] = f.radius;
      j["modes"] = f.modes;
      j["max_mode"] = f.max_mode;
      j["amplitude"] = f.amplitude;
      break;
    case FamilyKind::zero: break;
    case FamilyKind::constant: j["value"] = f.value; break;
    case FamilyKind::polynomial: j["coefficients"] = f.coefficients; break;
  }
  if (f.seed) j["seed"] = *f.seed;
  if (f.dilation != 1.0) j["dilation"] = f.dilation;
  return j;
}

/// Parses a family object; unknown keys are rejected.
inline CorpusFamily family_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("family_json", "family spec must be an object");
  if (!j.contains("family") || !j["family"].is_string()) throw ValidationError("family_json", "missing 'family' name");
  CorpusFamily f;
  f.kind = family_kind_from_string(j["family"].get<std::string>());
  const auto allowed = detail::family_keys(f.kind);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ValidationError("family_json", "unknown key '" + it.key() + "' for family " + to_string(f.kind));
  auto num = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw ValidationError("family_json", std::string(key) + " must be a number");
    out = j[key].get<double>();
  };
  auto integer = [&](const char* key, int& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) throw ValidationError("family_json", std::string(key) + " must be an integer");
    out = j[key].get<int>();
  };
  auto vec = [&](const char* key, std::vector<double>& out) {
    if (!j.contains(key)) return;
    const auto& v = j[key];
    if (v.is_number()) {
      out = {v.get<double>()};
      return;
    }
    if (!v.is_array()) throw ValidationError("family_json", std::string(key) + " must be an array of numbers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) throw ValidationError("family_json", std::string(key) + " must be an array of numbers");
      out.push_back(e.get<double>());
    }
  };
  vec("center", f.center);
  num("width", f.width);
  num("amplitude", f.amplitude);
  num("inner_radius", f.inner_radius);
  num("outer_radius", f.outer_radius);
  vec("wavevector", f.wavevector);
  num("phase", f.phase);
  integer("count", f.count);
  num("spread", f.spread);
  num("radius", f.radius);
  integer("modes", f.modes);
  integer("max_mode", f.max_mode);
  num("value", f.value);
  vec("coefficients", f.coefficients);
  num("dilation", f.dilation);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
      throw ValidationError("family_json", "seed must be a non-negative integer");
    if (!j["seed"].is_number_unsigned() && j["seed"].get<long long>() < 0)
      throw ValidationError("family_json", "seed must be a non-negative integer");
    f.seed = j["seed"].get<std::uint64_t>();
  }
  validate_family(f);
  return f;
}

}  // namespace mclab
