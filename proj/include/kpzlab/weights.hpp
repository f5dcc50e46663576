#pragma once

// Weight distributions for the lattice disorder.
//
// A WeightSpec is a raw law (standard normal, +-1 coin, uniform on [0,1],
// exponential with a rate, or a finite list of atoms) together with an
// affine map x -> (x - location) / scale applied at sample time.
// standardize() picks location/scale from the exact raw moments so the
// sampled weights have mean 0 and variance 1.

#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "kpzlab/errors.hpp"
#include "kpzlab/rng.hpp"

namespace kpz {

enum class Family { gaussian, rademacher, uniform, shifted_exponential, finite_discrete };

struct Atom {
  double value = 0.0;
  double prob = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct WeightSpec {
  Family family = Family::gaussian;
  double rate = 1.0;          // shifted_exponential only
  std::vector<Atom> atoms;    // finite_discrete only
  double location = 0.0;
  double scale = 1.0;

  static WeightSpec of(Family f) {
    WeightSpec s;
    s.family = f;
    return s;
  }
  static WeightSpec gaussian() { return {}; }
  static WeightSpec rademacher() { return of(Family::rademacher); }
  static WeightSpec uniform() { return of(Family::uniform); }
  static WeightSpec shifted_exponential(double rate = 1.0) {
    WeightSpec s = of(Family::shifted_exponential);
    s.rate = rate;
    return s;
  }
  static WeightSpec finite_discrete(std::vector<Atom> atoms) {
    WeightSpec s = of(Family::finite_discrete);
    s.atoms = std::move(atoms);
    return s;
  }

  friend bool operator==(const WeightSpec&, const WeightSpec&) = default;
};

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::rademacher: return "rademacher";
    case Family::uniform: return "uniform";
    case Family::shifted_exponential: return "shifted_exponential";
    case Family::finite_discrete: return "finite_discrete";
  }
  return "unknown";
}

inline Family parse_family(std::string_view name) {
  for (Family f : {Family::gaussian, Family::rademacher, Family::uniform,
                   Family::shifted_exponential, Family::finite_discrete}) {
    if (family_name(f) == name) return f;
  }
  throw DomainError("unknown weight family '" + std::string(name) + "'");
}

namespace detail {

inline void validate_atoms(const std::vector<Atom>& atoms) {
  if (atoms.empty()) throw DomainError("finite_discrete: no atoms");
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!(a.prob >= 0.0) || !std::isfinite(a.value)) {
      throw DomainError("finite_discrete: probabilities must be >= 0 and values finite");
    }
    total += a.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("finite_discrete: probabilities sum to " + std::to_string(total) +
                      ", expected 1");
  }
}

inline void validate_raw(const WeightSpec& s) {
  if (s.family == Family::shifted_exponential && !(s.rate > 0.0 && std::isfinite(s.rate))) {
    throw DomainError("shifted_exponential: rate must be positive");
  }
  if (s.family == Family::finite_discrete) validate_atoms(s.atoms);
}

inline double raw_mean(const WeightSpec& s) {
  switch (s.family) {
    case Family::gaussian:
    case Family::rademacher: return 0.0;
    case Family::uniform: return 0.5;
    case Family::shifted_exponential: return 1.0 / s.rate;
    case Family::finite_discrete: {
      double m = 0.0;
      for (const Atom& a : s.atoms) m += a.prob * a.value;
      return m;
    }
  }
  return 0.0;
}

// k-th central moment of the raw law, k in [0, 4].
inline double raw_central_moment(const WeightSpec& s, int k) {
  if (k == 0) return 1.0;
  if (k == 1) return 0.0;
  switch (s.family) {
    case Family::gaussian: {
      constexpr std::array<double, 5> m = {1, 0, 1, 0, 3};
      return m[static_cast<std::size_t>(k)];
    }
    case Family::rademacher: return k % 2 == 0 ? 1.0 : 0.0;
    case Family::uniform:
      // E[(U - 1/2)^k] = (1/2)^k / (k + 1) for even k.
      return k % 2 == 0 ? std::pow(0.5, k) / (k + 1) : 0.0;
    case Family::shifted_exponential: {
      // Central moments of Exp(1) are 1, 2, 9 for k = 2, 3, 4.
      constexpr std::array<double, 5> m = {1, 0, 1, 2, 9};
      return m[static_cast<std::size_t>(k)] / std::pow(s.rate, k);
    }
    case Family::finite_discrete: {
      const double mean = raw_mean(s);
      double c = 0.0;
      for (const Atom& a : s.atoms) c += a.prob * std::pow(a.value - mean, k);
      return c;
    }
  }
  return 0.0;
}

}  // namespace detail

/// Affine location/scale making the law exactly mean 0, variance 1.
/// Depends only on the raw law, so it is idempotent.
inline WeightSpec standardize(WeightSpec spec) {
  detail::validate_raw(spec);
  const double var = detail::raw_central_moment(spec, 2);
  if (!(var > 0.0)) throw DomainError("degenerate distribution: raw variance is zero");
  spec.location = detail::raw_mean(spec);
  spec.scale = std::sqrt(var);
  return spec;
}

inline double mean(const WeightSpec& s) { return (detail::raw_mean(s) - s.location) / s.scale; }

inline double variance(const WeightSpec& s) {
  return detail::raw_central_moment(s, 2) / (s.scale * s.scale);
}

/// Closed-form k-th central moment (k <= 4) of the transformed law.
inline double exact_moments(const WeightSpec& s, int k) {
  if (k < 0 || k > 4) throw DomainError("exact_moments: only k in [0, 4] is supported");
  detail::validate_raw(s);
  return detail::raw_central_moment(s, k) / std::pow(s.scale, k);
}

inline bool is_standardized(const WeightSpec& s, double tol = 1e-12) {
  return std::abs(mean(s)) <= tol && std::abs(variance(s) - 1.0) <= tol;
}

/// Draws transformed weights from a stream.  Cheap to copy.
class WeightSampler {
 public:
  explicit WeightSampler(WeightSpec spec) : spec_(std::move(spec)) {
    detail::validate_raw(spec_);
    if (!(spec_.scale > 0.0)) throw DomainError("WeightSpec scale must be positive");
    inv_scale_ = 1.0 / spec_.scale;
    if (spec_.family == Family::finite_discrete) {
      cumulative_.reserve(spec_.atoms.size());
      double c = 0.0;
      for (const Atom& a : spec_.atoms) cumulative_.push_back(c += a.prob);
      cumulative_.back() = 1.0;
    }
  }

  double operator()(Stream& stream) const { return (raw(stream) - spec_.location) * inv_scale_; }

  std::vector<double> sample(Stream& stream, std::size_t count) const {
    std::vector<double> out(count);
    for (double& x : out) x = (*this)(stream);
    return out;
  }

  const WeightSpec& spec() const { return spec_; }

 private:
  double raw(Stream& stream) const {
    switch (spec_.family) {
      case Family::gaussian: return stream.normal();
      case Family::rademacher: return (stream() >> 63) ? 1.0 : -1.0;
      case Family::uniform: return stream.uniform();
      case Family::shifted_exponential: return stream.exponential() / spec_.rate;
      case Family::finite_discrete: {
        const double u = stream.uniform();
        std::size_t k = 0;
        while (k + 1 < cumulative_.size() && u >= cumulative_[k]) ++k;
        return spec_.atoms[k].value;
      }
    }
    return 0.0;
  }

  WeightSpec spec_;
  double inv_scale_ = 1.0;
  std::vector<double> cumulative_;
};

inline std::vector<double> sample(const WeightSpec& spec, Stream& stream, std::size_t count) {
  return WeightSampler(spec).sample(stream, count);
}

// JSON form: {"family": ..., ["rate": ...], ["atoms": [[v, p], ...]], "location", "scale"}.

inline void to_json(nlohmann::json& j, const WeightSpec& s) {
  j = nlohmann::json{{"family", family_name(s.family)}, {"location", s.location},
                     {"scale", s.scale}};
  if (s.family == Family::shifted_exponential) j["rate"] = s.rate;
  if (s.family == Family::finite_discrete) {
    auto atoms = nlohmann::json::array();
    for (const Atom& a : s.atoms) atoms.push_back({a.value, a.prob});
    j["atoms"] = std::move(atoms);
  }
}

inline void from_json(const nlohmann::json& j, WeightSpec& s) {
  s = WeightSpec{};
  s.family = parse_family(j.at("family").get<std::string>());
  if (s.family == Family::shifted_exponential) s.rate = j.value("rate", 1.0);
  if (s.family == Family::finite_discrete) {
    for (const auto& a : j.at("atoms")) s.atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
  }
  if (j.contains("location") || j.contains("scale")) {
    s.location = j.value("location", 0.0);
    s.scale = j.value("scale", 1.0);
  } else {
    s = standardize(s);
  }
}

}  // namespace kpz
