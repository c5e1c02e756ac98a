#include "eulermv/pathlaw.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace eulermv::pathlaw {

namespace {
constexpr double kMassTol = 1e-12;
}

PathLaw PathLaw::delta(std::vector<int> path) {
    PathLaw law;
    law.horizon = static_cast<int>(path.size()) - 1;
    law.atoms.emplace_back(std::move(path), 1.0);
    return law;
}

PathLaw PathLaw::mix(const std::vector<std::pair<PathLaw, double>>& parts) {
    PathLaw out;
    if (parts.empty()) throw ConfigError("pathlaw: cannot mix zero laws");
    out.horizon = parts[0].first.horizon;
    for (const auto& [law, w] : parts) {
        if (law.horizon != out.horizon) throw ConfigError("pathlaw: mixing laws of unequal horizon");
        for (const auto& [p, q] : law.atoms) out.atoms.emplace_back(p, w * q);
    }
    out.canonicalize();
    return out;
}

void PathLaw::canonicalize() {
    for (const auto& [p, q] : atoms) {
        if (static_cast<int>(p.size()) != horizon + 1)
            throw ConfigError("pathlaw: atom of wrong length");
        if (q < -kMassTol) throw ConfigError("pathlaw: negative probability");
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<std::vector<int>, double>> merged;
    for (auto& [p, q] : atoms) {
        if (!merged.empty() && merged.back().first == p)
            merged.back().second += q;
        else
            merged.emplace_back(std::move(p), q);
    }
    std::erase_if(merged, [](const auto& a) { return a.second <= kMassTol; });
    atoms = std::move(merged);
    if (std::abs(total_mass() - 1.0) > 1e-9)
        throw ConfigError("pathlaw: probabilities sum to " + std::to_string(total_mass()));
}

int PathLaw::start_label() const {
    if (atoms.empty()) throw ConfigError("pathlaw: empty law");
    return atoms[0].first[0];
}

double PathLaw::total_mass() const {
    double s = 0.0;
    for (const auto& [p, q] : atoms) s += q;
    return s;
}

bool approx_equal(const PathLaw& a, const PathLaw& b, double tol) {
    if (a.horizon != b.horizon) return false;
    PathLaw ca = a, cb = b;
    ca.canonicalize();
    cb.canonicalize();
    if (ca.atoms.size() != cb.atoms.size()) return false;
    for (std::size_t i = 0; i < ca.atoms.size(); ++i) {
        if (ca.atoms[i].first != cb.atoms[i].first) return false;
        if (std::abs(ca.atoms[i].second - cb.atoms[i].second) > tol) return false;
    }
    return true;
}

PathLaw shift(const PathLaw& law, int tau) {
    if (tau < 0 || tau > law.horizon) throw ConfigError("shift: tau out of the grid");
    PathLaw out;
    out.horizon = law.horizon - tau;
    for (const auto& [p, q] : law.atoms)
        out.atoms.emplace_back(std::vector<int>(p.begin() + tau, p.end()), q);
    out.canonicalize();
    return out;
}

PathLaw restrict_horizon(const PathLaw& law, int steps) {
    if (steps < 0 || steps > law.horizon) throw ConfigError("restrict: horizon out of range");
    PathLaw out;
    out.horizon = steps;
    for (const auto& [p, q] : law.atoms)
        out.atoms.emplace_back(std::vector<int>(p.begin(), p.begin() + steps + 1), q);
    out.canonicalize();
    return out;
}

std::vector<std::pair<std::vector<int>, PathLaw>> disintegrate(const PathLaw& law, int T) {
    if (T < 0 || T > law.horizon) throw ConfigError("disintegrate: T out of the grid");
    std::map<std::vector<int>, std::vector<std::pair<std::vector<int>, double>>> buckets;
    std::map<std::vector<int>, double> mass;
    for (const auto& [p, q] : law.atoms) {
        std::vector<int> prefix(p.begin(), p.begin() + T + 1);
        std::vector<int> suffix(p.begin() + T, p.end()); // starts at the prefix endpoint
        buckets[prefix].emplace_back(std::move(suffix), q);
        mass[prefix] += q;
    }
    std::vector<std::pair<std::vector<int>, PathLaw>> out;
    for (auto& [prefix, atoms] : buckets) {
        if (mass[prefix] <= kMassTol)
            throw ConfigError("disintegrate: conditioning on a zero-mass prefix");
        PathLaw cond;
        cond.horizon = law.horizon - T;
        for (auto& [s, q] : atoms) cond.atoms.emplace_back(std::move(s), q / mass[prefix]);
        cond.canonicalize();
        out.emplace_back(prefix, std::move(cond));
    }
    return out;
}

PathLaw reconstruct(const PathLaw& law, int T,
                    const std::vector<std::pair<std::vector<int>, PathLaw>>& Q) {
    if (T < 0 || T > law.horizon) throw ConfigError("reconstruct: T out of the grid");
    // prefix marginal of `law`
    std::map<std::vector<int>, double> mass;
    for (const auto& [p, q] : law.atoms)
        mass[std::vector<int>(p.begin(), p.begin() + T + 1)] += q;

    auto find_kernel = [&](const std::vector<int>& prefix) -> const PathLaw& {
        for (const auto& [pre, k] : Q)
            if (pre == prefix) return k;
        throw ConfigError("reconstruct: no continuation supplied for a positive-mass prefix");
    };

    PathLaw out;
    out.horizon = law.horizon - T + T; // same grid as `law` when kernels share the suffix horizon
    int suffix_h = -1;
    for (const auto& [prefix, w] : mass) {
        if (w <= kMassTol) continue;
        const PathLaw& k = find_kernel(prefix);
        if (suffix_h < 0) suffix_h = k.horizon;
        if (k.horizon != suffix_h) throw ConfigError("reconstruct: kernels of unequal horizon");
        if (k.start_label() != prefix.back())
            throw ConfigError("reconstruct: continuation does not start at the prefix endpoint");
        for (const auto& [s, q] : k.atoms) {
            std::vector<int> full(prefix);
            full.insert(full.end(), s.begin() + 1, s.end());
            out.atoms.emplace_back(std::move(full), w * q);
        }
    }
    out.horizon = T + (suffix_h < 0 ? 0 : suffix_h);
    out.canonicalize();
    return out;
}

double discounted_value(const PathLaw& law, const DiscountedFunctional& fn) {
    double v = 0.0;
    for (const auto& [p, q] : law.atoms) {
        double acc = 0.0;
        for (std::size_t t = 0; t < p.size(); ++t)
            acc += std::exp(-fn.lambda * static_cast<double>(t)) * fn.f(p[t]);
        v += q * acc;
    }
    return v;
}

namespace {

// realized shifted conditionals at time tau, grouped by endpoint label
std::map<int, std::vector<PathLaw>> realized_conditionals(const CandidateMap& cm, int tau) {
    std::map<int, std::vector<PathLaw>> out;
    for (const auto& [y, laws] : cm.sets) {
        for (const auto& law : laws) {
            if (tau > law.horizon) continue;
            for (auto& [prefix, cond] : disintegrate(law, tau)) {
                auto& bucket = out[prefix.back()];
                bool dup = false;
                for (const auto& existing : bucket)
                    if (approx_equal(existing, cond)) dup = true;
                if (!dup) bucket.push_back(cond);
            }
        }
    }
    return out;
}

bool matches_some_member(const PathLaw& probe, const std::vector<PathLaw>& set) {
    for (const auto& member : set) {
        if (probe.horizon > member.horizon) continue;
        if (approx_equal(probe, restrict_horizon(member, probe.horizon))) return true;
    }
    return false;
}

} // namespace

ClosureReport check_pre_markov_closure(const CandidateMap& cm) {
    ClosureReport rep;
    if (cm.sets.empty()) {
        rep.ok = false;
        rep.diagnostic = "empty candidate map";
        return rep;
    }
    int horizon = cm.sets.begin()->second.empty() ? 0 : cm.sets.begin()->second[0].horizon;

    for (int tau = 1; tau < horizon; ++tau) {
        auto realized = realized_conditionals(cm, tau);

        // (a) disintegration: every realized conditional lies in the candidate
        // set of its endpoint (up to horizon restriction)
        for (const auto& [label, conds] : realized) {
            auto it = cm.sets.find(label);
            if (it == cm.sets.end()) {
                rep.ok = false;
                rep.diagnostic = "disintegration: no candidate set for label " + std::to_string(label);
                return rep;
            }
            for (const auto& cond : conds) {
                if (!matches_some_member(cond, it->second)) {
                    rep.ok = false;
                    rep.diagnostic = "disintegration: a tau=" + std::to_string(tau) +
                                     " conditional at label " + std::to_string(label) +
                                     " leaves the candidate set";
                    return rep;
                }
            }
        }

        // (b) reconstruction: re-gluing any member's prefix marginal with any
        // assignment of realized conditionals stays in the set
        for (const auto& [y, laws] : cm.sets) {
            for (const auto& law : laws) {
                if (tau > law.horizon) continue;
                auto conds = disintegrate(law, tau);
                // enumerate assignments: per prefix, any realized conditional at
                // its endpoint
                std::vector<std::vector<const PathLaw*>> options;
                for (const auto& [prefix, cond] : conds) {
                    (void)cond;
                    std::vector<const PathLaw*> opt;
                    auto it = realized.find(prefix.back());
                    if (it != realized.end())
                        for (const auto& c : it->second) opt.push_back(&c);
                    if (opt.empty()) {
                        rep.ok = false;
                        rep.diagnostic = "reconstruction: no continuation available at a prefix";
                        return rep;
                    }
                    options.push_back(std::move(opt));
                }
                std::size_t combos = 1;
                for (const auto& o : options) combos *= o.size();
                if (combos > 4096)
                    throw ConfigError("check_pre_markov_closure: assignment space too large");
                for (std::size_t c = 0; c < combos; ++c) {
                    std::vector<std::pair<std::vector<int>, PathLaw>> Q;
                    std::size_t rem = c;
                    for (std::size_t i = 0; i < conds.size(); ++i) {
                        Q.emplace_back(conds[i].first, *options[i][rem % options[i].size()]);
                        rem /= options[i].size();
                    }
                    PathLaw glued = reconstruct(law, tau, Q);
                    auto it = cm.sets.find(y);
                    if (!matches_some_member(glued, it->second)) {
                        rep.ok = false;
                        rep.diagnostic = "reconstruction: a tau=" + std::to_string(tau) +
                                         " re-gluing of a member at label " + std::to_string(y) +
                                         " leaves the candidate set";
                        return rep;
                    }
                }
            }
        }
    }
    return rep;
}

bool is_markov_family(const std::map<int, PathLaw>& family, std::string* why) {
    for (const auto& [y, law] : family) {
        for (int tau = 1; tau < law.horizon; ++tau) {
            for (const auto& [prefix, cond] : disintegrate(law, tau)) {
                const int z = prefix.back();
                auto it = family.find(z);
                if (it == family.end()) {
                    if (why)
                        *why = "family has no law for label " + std::to_string(z) +
                               " reached at tau=" + std::to_string(tau);
                    return false;
                }
                PathLaw expected = restrict_horizon(it->second, law.horizon - tau);
                if (!approx_equal(cond, expected)) {
                    if (why)
                        *why = "conditional at tau=" + std::to_string(tau) + " from label " +
                               std::to_string(y) + " differs from the selected law at label " +
                               std::to_string(z);
                    return false;
                }
            }
        }
    }
    return true;
}

Selection krylov_select(const CandidateMap& cm, const std::vector<DiscountedFunctional>& fns) {
    ClosureReport closure = check_pre_markov_closure(cm);
    if (!closure.ok)
        throw ConfigError("krylov_select: candidate map is not pre-Markov (" + closure.diagnostic +
                          ")");

    Selection sel;
    for (const auto& [y, laws] : cm.sets) {
        if (laws.empty()) throw ConfigError("krylov_select: empty candidate set");
        std::vector<std::size_t> survivors(laws.size());
        for (std::size_t i = 0; i < laws.size(); ++i) survivors[i] = i;
        for (const auto& fn : fns) {
            double best = -1e300;
            for (std::size_t i : survivors) best = std::max(best, discounted_value(laws[i], fn));
            std::vector<std::size_t> next;
            for (std::size_t i : survivors)
                if (discounted_value(laws[i], fn) >= best - 1e-12) next.push_back(i);
            survivors = std::move(next);
            if (survivors.size() == 1) break;
        }
        sel.chosen_index[y] = static_cast<int>(survivors.front());
        sel.chosen[y] = laws[survivors.front()];
    }
    std::string why;
    sel.markov = is_markov_family(sel.chosen, &why);
    sel.diagnostic = sel.markov ? "" : why;
    return sel;
}

std::string to_text(const PathLaw& law) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& [p, q] : law.atoms) {
        for (std::size_t i = 0; i < p.size(); ++i) os << p[i] << ",";
        os << q << "\n";
    }
    return os.str();
}

PathLaw from_text(const std::string& text) {
    PathLaw law;
    std::istringstream is(text);
    std::string line;
    int horizon = -1;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<int> path;
        std::istringstream ls(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(ls, tok, ',')) toks.push_back(tok);
        if (toks.size() < 2) throw ConfigError("pathlaw: malformed line '" + line + "'");
        for (std::size_t i = 0; i + 1 < toks.size(); ++i) path.push_back(std::stoi(toks[i]));
        const double q = std::stod(toks.back());
        if (horizon < 0) horizon = static_cast<int>(path.size()) - 1;
        law.atoms.emplace_back(std::move(path), q);
    }
    law.horizon = std::max(horizon, 0);
    law.canonicalize();
    return law;
}

double state_metric(const FluidState& a, const FluidState& b) {
    require_same_grid(a.rho.grid(), b.rho.grid(), "state_metric");
    double d2 = (a.rho - b.rho).l2sq() + (a.S - b.S).l2sq();
    double kinetic = 0.0;
    for (int c = 0; c < a.rho.grid().dim; ++c) {
        d2 += (a.mom.comp[c] - b.mom.comp[c]).l2sq();
        SpectralField wa = a.mom.comp[c], wb = b.mom.comp[c];
        // m / sqrt(rho) pointwise
        std::vector<double> va(a.rho.grid().points()), vb(va.size());
        for (std::size_t i = 0; i < va.size(); ++i) {
            va[i] = wa.phys()[i] / std::sqrt(std::abs(a.rho.phys()[i]));
            vb[i] = wb.phys()[i] / std::sqrt(std::abs(b.rho.phys()[i]));
        }
        for (std::size_t i = 0; i < va.size(); ++i) {
            const double d = va[i] - vb[i];
            kinetic += d * d;
        }
    }
    kinetic *= a.rho.grid().cell_volume();
    return std::sqrt(d2) + std::sqrt(kinetic);
}

int StateQuantizer::label_of(const FluidState& st) {
    std::vector<long long> key;
    const GridSpec& g = st.rho.grid();
    int k[3];
    auto add_field = [&](const SpectralField& f) {
        for (std::size_t i = 0; i < f.spec().size(); ++i) {
            f.wavevector(i, k);
            bool keep = true;
            for (int a = 0; a < g.dim; ++a)
                if (std::abs(k[a]) > max_mode_) keep = false;
            if (!keep) continue;
            key.push_back(std::llround(f.spec()[i].real() / res_));
            key.push_back(std::llround(f.spec()[i].imag() / res_));
        }
    };
    add_field(st.rho);
    for (const auto& c : st.mom.comp) add_field(c);
    add_field(st.S);
    auto [it, inserted] = labels_.emplace(std::move(key), static_cast<int>(labels_.size()));
    (void)inserted;
    return it->second;
}

} // namespace eulermv::pathlaw
