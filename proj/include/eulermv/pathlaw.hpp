#pragma once

// ============================================================================
// Finite path-space probability machinery.
//
// A PathLaw is a finitely supported measure on label sequences over a fixed
// step grid. Disintegration conditions on a time-T prefix; reconstruction
// glues a law to a kernel of continuations; both are exact on finite spaces
// and inverse to each other. krylov_select extracts, from a candidate map
// y -> C(y), the selection maximizing a list of discounted functionals, and
// verifies the exact finite-space Markov property on the result:
//   for every y, every tau and every positive-mass prefix of P_y, the shifted
//   conditional equals P_{endpoint} restricted to the remaining horizon.
//
// Closure of the candidate map (the pre-Markov property, finite reduction):
//   (a) every shifted conditional of a member equals the restriction of some
//       member at the endpoint label;
//   (b) re-gluing any member's prefix marginal with any assignment of
//       realized conditionals stays in the candidate set.
// ============================================================================

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "eulermv/errors.hpp"
#include "eulermv/field.hpp"
#include "eulermv/scheme.hpp"

namespace eulermv::pathlaw {

struct PathLaw {
    int horizon = 0; // steps; every path carries horizon+1 labels
    std::vector<std::pair<std::vector<int>, double>> atoms;

    static PathLaw delta(std::vector<int> path);
    static PathLaw mix(const std::vector<std::pair<PathLaw, double>>& parts);

    void canonicalize(); // sort atoms, merge duplicates, validate mass
    int start_label() const;
    double total_mass() const;
};

bool approx_equal(const PathLaw& a, const PathLaw& b, double tol = 1e-12);

// law of the path from grid index tau onward, re-indexed to start at 0
PathLaw shift(const PathLaw& law, int tau);
// marginal law of the first `steps` steps
PathLaw restrict_horizon(const PathLaw& law, int steps);

// conditional laws per positive-mass prefix of length T+1; each conditional
// is shifted to start at 0 and begins at the prefix endpoint
std::vector<std::pair<std::vector<int>, PathLaw>> disintegrate(const PathLaw& law, int T);

// glue: for every positive-mass prefix, Q must supply a continuation law
// starting at the prefix endpoint
PathLaw reconstruct(const PathLaw& law, int T,
                    const std::vector<std::pair<std::vector<int>, PathLaw>>& Q);

// ---- candidate maps and selection ------------------------------------------------

struct CandidateMap {
    std::map<int, std::vector<PathLaw>> sets;
};

struct ClosureReport {
    bool ok = true;
    std::string diagnostic; // names the violated property when !ok
};

ClosureReport check_pre_markov_closure(const CandidateMap& cm);

struct DiscountedFunctional {
    double lambda = 1.0;
    std::function<double(int)> f; // bounded function of the state label
};

double discounted_value(const PathLaw& law, const DiscountedFunctional& fn);

struct Selection {
    std::map<int, PathLaw> chosen;
    std::map<int, int> chosen_index;
    bool markov = false;
    std::string diagnostic;
};

// Iteratively maximizes the functionals over each candidate set (ties broken
// by stored order), then runs the exact Markov verification on the selected
// family. Throws ConfigError with a diagnostic naming the violated closure
// property when the candidate map is not pre-Markov.
Selection krylov_select(const CandidateMap& cm, const std::vector<DiscountedFunctional>& fns);

// exact finite-space Markov check of an arbitrary family (label -> law)
bool is_markov_family(const std::map<int, PathLaw>& family, std::string* why = nullptr);

// ---- serialization ------------------------------------------------------------------

// one path per line: labels comma-separated, probability last
std::string to_text(const PathLaw& law);
PathLaw from_text(const std::string& text);

// ---- quantized solver states ---------------------------------------------------------

// Comparison metric for solver snapshots: L2 distances of (rho, m, S) plus
// the L2 distance of m/sqrt(rho).
double state_metric(const FluidState& a, const FluidState& b);

// Labels solver snapshots by rounding the leading Fourier coefficients.
class StateQuantizer {
public:
    StateQuantizer(double resolution, int max_mode) : res_(resolution), max_mode_(max_mode) {}
    int label_of(const FluidState& st);
    std::size_t size() const { return labels_.size(); }

private:
    double res_;
    int max_mode_;
    std::map<std::vector<long long>, int> labels_;
};

} // namespace eulermv::pathlaw
