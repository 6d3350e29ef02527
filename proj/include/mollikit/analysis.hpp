#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mollikit/mollify.hpp"

namespace mollikit {

enum class NormKind { Lp, W1p, W1pSemi, TV };

struct NormSpec {
  NormKind kind = NormKind::Lp;
  double p = 2.0;  ///< ignored for TV; +inf allowed
};

/// Parses "L1", "L2", "Linf", "W11", "W12", "H1" (W12 seminorm), "TV".
NormSpec parse_norm(const std::string& name);
std::string to_string(const NormSpec& spec);

/// Riemann-sum norms over inside nodes: (h^N Σ |f|^p)^(1/p), plus |∇f| (central differences)
/// for W1p. TV is h^N Σ |forward-difference gradient| over nodes touching Ω.
double norm(const ScalarField& f, const NormSpec& spec);

struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
};

BoundCheck make_check(std::string name, double lhs, double rhs, double slack = 0.0);

// --- weak L1 -----------------------------------------------------------------------------------

struct WeakL1Row {
  double lambda = 0.0;
  double measure = 0.0;  ///< |{|Tf| > λ}|
  double rhs = 0.0;      ///< (C/λ)‖f‖₁ + h^N
  bool pass = true;
};

struct WeakL1Report {
  double constant = 0.0;  ///< 5^N ω_N m_rho
  double l1_norm = 0.0;
  std::vector<WeakL1Row> rows;
  std::size_t violations = 0;
};

WeakL1Report weak_l1_check(const ScalarField& f, const MollifierConfig& cfg,
                           const std::vector<double>& lambdas);

// --- L1 operator norm --------------------------------------------------------------------------

struct OperatorNormOptions {
  std::size_t random_probes = 100;
  std::uint64_t seed = 0;
  /// Rescale steps as if the domain were shrunk so that max σ < 1/8.
  bool rescale = true;
};

struct OperatorNormReport {
  double estimate = 0.0;        ///< sup over probes, after rescaling when enabled
  double estimate_raw = 0.0;    ///< sup at the original scale; NaN when that step is too steep
  double bound = 0.0;           ///< m_rho ω_N (1 + N ln(2/κ))
  double limsup_bound = 0.0;    ///< m_rho ω_N (1 + N ln(1/κ))
  double scale = 1.0;           ///< step multiplier equivalent to the domain rescale
  double lipschitz = 0.0;       ///< Lipschitz bound of the interpolated step
  std::size_t probes = 0;
  std::size_t argmax_node = 0;
  bool pass = true;             ///< estimate <= 1.1·bound
};

/// Per-probe integral ∫ C(x) ρ((x - y)/s(x)) dx evaluated on a local lattice around y.
double operator_norm_integral(const Mollifier& T, const Point& y, double lipschitz);

/// Lipschitz bound of the multilinear interpolant of a field.
double interpolant_lipschitz(const ScalarField& f);

/// sup over probe nodes of the per-probe integral, with the quadratic-decay bounds.
OperatorNormReport l1_operator_norm(const MollifierConfig& cfg, const OperatorNormOptions& opts = {});

// --- convergence studies -----------------------------------------------------------------------

struct StudyRow {
  int n = 0;
  std::map<std::string, double> errors;
  double tv = 0.0;  ///< TV(T_n f)
  double runtime_ms = 0.0;
};

struct StudyReport {
  std::string fixture;
  std::vector<int> n_values;
  std::vector<StudyRow> rows;
  std::vector<BoundCheck> checks;
  double reference_tv = 0.0;  ///< TV(f)

  bool pass() const;
};

struct StudyOptions {
  /// Strict BV convergence: |TV(T_n f) - TV(f)| <= ζ_n TV(f) (modified variant).
  bool strict_tv = false;
  /// Weak* boundedness: TV(T_n f) <= ceiling·TV(f).
  std::optional<double> tv_ceiling;
  /// Monotone (5% slack) and final <= 0.3·initial for every norm.
  bool decay_checks = true;
};

using ConfigFamily = std::function<MollifierConfig(int n)>;

StudyReport convergence_study(const std::string& fixture, const ScalarField& f,
                              const ConfigFamily& family, const std::vector<int>& n_list,
                              const std::vector<NormSpec>& norms, const StudyOptions& opts = {});

/// Monotone-within-5% and final <= 0.3·initial checks for one error sequence.
void append_decay_checks(StudyReport& report, const std::string& label,
                         const std::vector<double>& errors);

/// Built-in fixtures: "sin" (Π sin πx_a), "poly" (Π 4x_a(1-x_a)), "step" (χ{x_0 > 1/2}),
/// "const" (≡ 1), "linear" (x_0).
ScalarField make_fixture(const std::string& name, const DomainPtr& domain);

// --- trace -------------------------------------------------------------------------------------

struct TraceRow {
  double width = 0.0;
  double max_error = 0.0;        ///< max |Tf - f| on {σ <= width}
  double oscillation = 0.0;      ///< max local oscillation of f at radius s(x) on the shell
  std::size_t nodes = 0;
  bool pass = true;
};

struct TraceReport {
  std::vector<TraceRow> rows;
  bool pass() const;
};

TraceReport trace_check(const ScalarField& f, const MollifierConfig& cfg,
                        const std::vector<double>& width_cells = {4.0, 8.0, 16.0});

// --- counterexample ----------------------------------------------------------------------------

/// f₀(y) = 1/(y ln²(2/y)) on (0,1).
double counterexample_f0(double y);
/// Closed form of T f₀ for the box kernel and η = σ: 1/(2x ln(1/x)) for x <= 1/2.
double counterexample_tf0_closed(double x);
/// T f₀(x) by adaptive quadrature of the box average over (x - σ(x), x + σ(x)).
double counterexample_tf0(double x);

struct CounterexampleGridRow {
  int resolution = 0;
  double tf_quarter = 0.0;  ///< grid pipeline value at the node nearest 1/4
  double x = 0.0;
  double closed = 0.0;
};

struct CounterexampleReport {
  std::vector<double> deltas;
  std::vector<double> integrals;          ///< I(δ) = ∫_δ^{1/2} T f₀
  std::vector<double> integrals_closed;
  std::vector<double> f0_norms;           ///< ‖f₀‖_{L¹(δ,1)}
  std::vector<double> f0_norms_closed;
  double slope = 0.0;                     ///< least-squares slope of I(δ) vs ln ln(1/δ)
  double tf_quarter = 0.0;
  std::vector<CounterexampleGridRow> grid;
  std::vector<BoundCheck> checks;
  bool pass() const;
};

CounterexampleReport counterexample_run(const std::vector<int>& resolutions);

// --- JSON --------------------------------------------------------------------------------------

nlohmann::json to_json(const BoundCheck& c);
nlohmann::json to_json(const StudyReport& r, bool timing);
nlohmann::json to_json(const WeakL1Report& r);
nlohmann::json to_json(const OperatorNormReport& r);
nlohmann::json to_json(const TraceReport& r);
nlohmann::json to_json(const CounterexampleReport& r);

/// Error table of a study as CSV: n, one column per norm, TV.
std::string study_csv(const StudyReport& r);

}  // namespace mollikit
