#include "bmp/experiment.hpp"

#include "bmp/engine.hpp"
#include "bmp/errors.hpp"
#include "bmp/fixed_point.hpp"
#include "bmp/phi.hpp"
#include "bmp/spine.hpp"
#include "bmp/statistics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace bmp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Context {
    const ExperimentSpec& spec;
    MotionModel motion;
    EigenData eigen;
    BranchingLaw law;
    unsigned threads;
    ExperimentResult& out;
};

EstimateWithError exact(double v, std::size_t n = 0) {
    EstimateWithError e;
    e.value = v;
    e.n_effective = n;
    return e;
}

void add(ExperimentResult& r, double t, std::string name, EstimateWithError e) {
    for (const auto& note : e.notes) r.warnings.push_back(name + " @ t=" + std::to_string(t) + ": " + note);
    r.rows.push_back({t, std::move(name), std::move(e)});
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double z_score(double a, double b, double se) {
    if (a == b) return 0.0;
    return se > 0.0 ? std::abs(a - b) / se : std::numeric_limits<double>::infinity();
}

SimulationConfig engine_config(const ExperimentSpec& spec, std::uint64_t seed) {
    SimulationConfig cfg;
    cfg.horizon = spec.horizon;
    cfg.snapshot_times = spec.snapshot_times;
    cfg.population_cap = spec.population_cap;
    cfg.seed = seed;
    return cfg;
}

// Engine replicas reduced to D_t per snapshot (NaN when truncated).
std::vector<std::vector<double>> d_values(const Context& c, const BranchingLaw& law, std::uint64_t seed) {
    return map_replicas(c.motion, law, c.spec.x0, engine_config(c.spec, seed), c.spec.replicas, c.threads,
                        [&](std::size_t, const std::vector<PopulationSnapshot>& snaps) {
                            std::vector<double> d;
                            for (const auto& s : snaps)
                                d.push_back(s.truncated ? kNaN : malthusian_D(s, c.eigen, law, c.spec.x0, true));
                            return d;
                        });
}

std::vector<double> column(const std::vector<std::vector<double>>& per_replica, std::size_t k, std::size_t& excluded,
                           bool square = false) {
    std::vector<double> xs;
    excluded = 0;
    for (const auto& rep : per_replica) {
        if (std::isnan(rep[k])) {
            ++excluded;
            continue;
        }
        xs.push_back(square ? rep[k] * rep[k] : rep[k]);
    }
    return xs;
}

bool analytic_moments(const MotionModel& m) { return !std::holds_alternative<ContactProcess>(m); }

// --- moment checks --------------------------------------------------------------

void moment_check(Context& c, bool second) {
    const auto& spec = c.spec;
    const std::size_t nt = spec.snapshot_times.size();
    const std::size_t ns = spec.sets.size();

    // Per replica: counts[k * ns + j] (NaN when truncated).
    const auto per_replica = map_replicas(c.motion, c.law, spec.x0, engine_config(spec, spec.seed), spec.replicas,
                                          c.threads, [&](std::size_t, const std::vector<PopulationSnapshot>& snaps) {
                                              std::vector<double> v(nt * ns, kNaN);
                                              for (std::size_t k = 0; k < nt; ++k) {
                                                  if (snaps[k].truncated) continue;
                                                  for (std::size_t j = 0; j < ns; ++j) {
                                                      const double n = static_cast<double>(count_in(snaps[k], spec.sets[j].set));
                                                      v[k * ns + j] = second ? n * n : n;
                                                  }
                                              }
                                              return v;
                                          });

    std::vector<StateFunction> fs;
    for (const auto& s : spec.sets) fs.push_back([set = s.set](const State& x) { return set.contains(x) ? 1.0 : 0.0; });
    const SpineRun run{spec.paths, spec.seed, c.threads};
    const auto spine = second ? many_to_two_table(c.motion, c.law, spec.x0, fs, spec.snapshot_times, run)
                              : many_to_one_table(c.motion, c.law, spec.x0, fs, spec.snapshot_times, run);

    const std::string what = second ? "second" : "mean";
    double worst_spine = 0.0;
    double worst_density = 0.0;
    bool have_density = false;
    for (std::size_t k = 0; k < nt; ++k) {
        const double t = spec.snapshot_times[k];
        for (std::size_t j = 0; j < ns; ++j) {
            const auto& label = spec.sets[j].label;
            std::size_t excluded = 0;
            const auto engine = mean_estimate(column(per_replica, k * ns + j, excluded), excluded);
            add(c.out, t, "engine_" + what + ":" + label, engine);
            add(c.out, t, "spine_" + what + ":" + label, spine[k][j]);
            worst_spine = std::max(worst_spine, z_score(engine.value, spine[k][j].value, joint_se(engine, spine[k][j])));
            if (!second) {
                if (const auto p = transition_probability(c.motion, spec.x0, spec.sets[j].set, t)) {
                    const double q = *p * std::exp(c.law.growth_rate() * t);
                    add(c.out, t, "density_mean:" + label, exact(q));
                    worst_density = std::max(worst_density, z_score(engine.value, q, engine.std_error));
                    have_density = true;
                }
            }
        }
    }
    const std::string lemma = second ? "many-to-two" : "many-to-one";
    c.out.diagnostics.push_back({lemma + ": engine vs spine within 4 joint SE", worst_spine <= 4.0,
                                 "max |z| = " + num(worst_spine)});
    if (have_density) {
        c.out.diagnostics.push_back({lemma + ": engine vs density quadrature within 4 engine SE", worst_density <= 4.0,
                                     "max |z| = " + num(worst_density)});
    }
}

// --- martingale and phi -------------------------------------------------------------

void d_curve_rows(Context& c, const BranchingLaw& law, const std::vector<std::vector<double>>& d, const std::string& suffix,
                  std::vector<EstimateWithError>* means, std::vector<EstimateWithError>* seconds) {
    for (std::size_t k = 0; k < c.spec.snapshot_times.size(); ++k) {
        const double t = c.spec.snapshot_times[k];
        std::size_t excluded = 0;
        auto m = mean_estimate(column(d, k, excluded), excluded);
        auto s = mean_estimate(column(d, k, excluded, true), excluded);
        add(c.out, t, "mean_D" + suffix, m);
        add(c.out, t, "second_moment_D" + suffix, s);
        if (analytic_moments(c.motion)) {
            add(c.out, t, "second_moment_D_analytic" + suffix, exact(second_moment_D(c.motion, c.eigen, law, c.spec.x0, t)));
        }
        if (means) means->push_back(m);
        if (seconds) seconds->push_back(s);
        c.out.summary["truncated_replicas"][suffix.empty() ? "D" : suffix][std::to_string(k)] = excluded;
    }
}

void martingale_curve_kind(Context& c) {
    const auto d = d_values(c, c.law, c.spec.seed);
    std::vector<EstimateWithError> means;
    d_curve_rows(c, c.law, d, "", &means, nullptr);

    std::ostringstream traj;
    traj << "replica,time,D\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(d.size(), 50); ++i) {
        for (std::size_t k = 0; k < c.spec.snapshot_times.size(); ++k) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, c.spec.snapshot_times[k], d[i][k]);
            traj << buf;
        }
    }
    c.out.extra_files.emplace_back("trajectories.csv", traj.str());

    if (!c.eigen.surrogate_h) {
        double worst = 0.0;
        for (const auto& m : means) worst = std::max(worst, z_score(m.value, 1.0, m.std_error));
        c.out.diagnostics.push_back({"mean D_t = 1 within 4 SE", worst <= 4.0, "max |z| = " + num(worst)});
    }
}

void phi_kind(Context& c) {
    if (!analytic_moments(c.motion) && !c.spec.surrogate) throw ConfigError("phi on the contact process needs surrogate = true");
    const auto r = phi_quadrature(c.motion, c.eigen, c.law, c.spec.x0, c.spec.phi);
    add(c.out, c.spec.phi.t_max, "phi", exact(r.value));
    add(c.out, c.spec.phi.t_max, "phi_divergent", exact(r.divergent ? 1.0 : 0.0));
    add(c.out, c.spec.phi.t_max, "phi_tail_slope", exact(r.tail_slope));
    for (const auto& n : r.notes) c.out.warnings.push_back("phi: " + n);
    c.out.diagnostics.push_back({"phi tail classification unambiguous", !r.ambiguous, "slope = " + num(r.tail_slope)});

    const auto d = d_values(c, c.law, c.spec.seed);
    std::vector<EstimateWithError> seconds;
    d_curve_rows(c, c.law, d, "", nullptr, &seconds);
    if (!r.divergent) {
        const auto& last = seconds.back();
        const double tol = std::max(4.0 * last.std_error, 0.05 * r.value);
        c.out.diagnostics.push_back({"engine E[D_t^2] at last time within max(4 SE, 5%) of phi",
                                     std::abs(last.value - r.value) <= tol,
                                     "engine " + num(last.value) + " +- " + num(last.std_error) + ", phi " + num(r.value)});
    }
}

void l2_scan_kind(Context& c) {
    const double lambda = c.eigen.lambda;
    if (!(lambda > 0.0)) throw ConfigError("l2-threshold-scan needs a motion with lambda > 0");
    for (double k : c.spec.scan_ratios)
        if (!(k > 1.0)) throw ConfigError("scan ratio " + num(k) + " violates r(m1 - 1) > lambda");
    const bool killed_bm = std::holds_alternative<KilledDriftBM>(c.motion);
    const auto& times = c.spec.snapshot_times;

    for (std::size_t i = 0; i < c.spec.scan_ratios.size(); ++i) {
        const double k = c.spec.scan_ratios[i];
        const BranchingLaw law(c.law.pmf(), k * lambda / (c.law.m1() - 1.0));
        const std::string suffix = "[k=" + num(k) + "]";

        const auto d = d_values(c, law, derive_seed(c.spec.seed, i, 7));
        std::vector<EstimateWithError> seconds;
        d_curve_rows(c, law, d, suffix, nullptr, &seconds);

        if (analytic_moments(c.motion)) {
            const auto r = phi_quadrature(c.motion, c.eigen, law, c.spec.x0, c.spec.phi);
            add(c.out, c.spec.phi.t_max, "phi" + suffix, exact(r.value));
            add(c.out, c.spec.phi.t_max, "phi_divergent" + suffix, exact(r.divergent ? 1.0 : 0.0));
            add(c.out, c.spec.phi.t_max, "phi_tail_slope" + suffix, exact(r.tail_slope));
            if (killed_bm && std::abs(k - 2.0) > 0.05) {
                const bool expect_divergent = k < 2.0;
                c.out.diagnostics.push_back({"phi flags " + std::string(expect_divergent ? "divergent" : "finite") +
                                                 " at r(m1-1) = " + num(k) + " lambda",
                                             r.divergent == expect_divergent && !r.ambiguous,
                                             "slope = " + num(r.tail_slope)});
            }
        }
        if (killed_bm && times.size() >= 2 && std::abs(k - 2.0) > 0.05) {
            const double ratio = seconds.back().value / seconds.front().value;
            const std::string span = "E[D^2](" + num(times.back()) + ") / E[D^2](" + num(times.front()) + ")";
            if (k < 2.0) {
                c.out.diagnostics.push_back({"divergence signature at k = " + num(k) + ": " + span + " > 3", ratio > 3.0,
                                             "ratio = " + num(ratio)});
            } else {
                c.out.diagnostics.push_back({"plateau signature at k = " + num(k) + ": " + span + " < 1.25",
                                             ratio < 1.25, "ratio = " + num(ratio)});
            }
        }
    }
}

// --- QSD ------------------------------------------------------------------------------

void qsd_kind(Context& c) {
    const auto cdf = *qsd_cdf(c.motion);
    const auto& spec = c.spec;
    const std::size_t nt = spec.snapshot_times.size();
    const std::size_t ns = spec.sets.size();

    struct Rep {
        bool survived = false;
        std::vector<double> positions;
        std::vector<double> ratios;  // [k * (ns - 1) + j - 1], NaN when undefined
    };
    const auto reps = map_replicas(c.motion, c.law, spec.x0, engine_config(spec, spec.seed), spec.replicas, c.threads,
                                   [&](std::size_t, const std::vector<PopulationSnapshot>& snaps) {
                                       Rep r;
                                       const auto& last = snaps.back();
                                       r.survived = !last.truncated && !last.live_states.empty();
                                       if (r.survived)
                                           for (const auto& s : last.live_states) r.positions.push_back(real_value(s));
                                       if (ns >= 2) {
                                           for (std::size_t k = 0; k < nt; ++k) {
                                               for (std::size_t j = 1; j < ns; ++j) {
                                                   std::optional<double> v;
                                                   if (!snaps[k].truncated) v = nu_ratio(snaps[k], spec.sets[j].set, spec.sets[0].set);
                                                   r.ratios.push_back(v.value_or(kNaN));
                                               }
                                           }
                                       }
                                       return r;
                                   });

    std::vector<double> pooled;
    std::size_t survivors = 0;
    for (const auto& r : reps) {
        if (!r.survived) continue;
        ++survivors;
        pooled.insert(pooled.end(), r.positions.begin(), r.positions.end());
    }
    const double t = spec.snapshot_times.back();
    add(c.out, t, "surviving_replicas", exact(static_cast<double>(survivors), reps.size()));
    add(c.out, t, "pooled_particles", exact(static_cast<double>(pooled.size()), survivors));
    if (pooled.empty()) {
        c.out.diagnostics.push_back({"KS distance below " + num(spec.ks_bound), false, "no surviving particles"});
        return;
    }
    const double ks = ks_distance(pooled, cdf);
    add(c.out, t, "ks_distance", exact(ks, survivors));
    c.out.diagnostics.push_back({"KS distance below " + num(spec.ks_bound), ks < spec.ks_bound, "KS = " + num(ks)});

    const std::size_t stride = (pooled.size() + 99'999) / 100'000;
    std::ostringstream samples;
    samples << "x\n";
    for (std::size_t i = 0; i < pooled.size(); i += stride) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g\n", pooled[i]);
        samples << buf;
    }
    c.out.extra_files.emplace_back("samples.csv", samples.str());
    c.out.summary["samples_stride"] = stride;

    for (std::size_t j = 1; j < ns; ++j) {
        const std::string name = spec.sets[j].label + "/" + spec.sets[0].label;
        const double limit = c.eigen.nu_mass(spec.sets[j].set) / c.eigen.nu_mass(spec.sets[0].set);
        for (std::size_t k = 0; k < nt; ++k) {
            std::vector<double> xs;
            for (const auto& r : reps) {
                const double v = r.ratios[k * (ns - 1) + j - 1];
                if (!std::isnan(v)) xs.push_back(v);
            }
            add(c.out, spec.snapshot_times[k], "nu_ratio:" + name, mean_estimate(xs));
        }
        add(c.out, t, "nu_ratio_limit:" + name, exact(limit));
    }
}

// --- extinction ---------------------------------------------------------------------

void eta_sigma_kind(Context& c) {
    const auto& spec = c.spec;
    const std::size_t nt = spec.snapshot_times.size();
    const bool use_d = !c.eigen.surrogate_h || spec.surrogate;
    struct Rep {
        std::vector<char> alive;
        double d_final;
        bool truncated;
    };
    const auto reps = map_replicas(c.motion, c.law, spec.x0, engine_config(spec, spec.seed), spec.replicas, c.threads,
                                   [&](std::size_t, const std::vector<PopulationSnapshot>& snaps) {
                                       Rep r;
                                       for (bool a : survival_indicator(snaps)) r.alive.push_back(a ? 1 : 0);
                                       const auto& last = snaps.back();
                                       r.truncated = last.truncated;
                                       r.d_final = (last.truncated || !use_d) ? kNaN
                                                                              : malthusian_D(last, c.eigen, c.law, spec.x0, true);
                                       return r;
                                   });

    EstimateWithError eta_last;
    for (std::size_t k = 0; k < nt; ++k) {
        std::size_t extinct = 0;
        for (const auto& r : reps) extinct += r.alive[k] ? 0 : 1;
        eta_last = proportion_estimate(extinct, reps.size());
        add(c.out, spec.snapshot_times[k], "eta", eta_last);
    }
    const double t = spec.snapshot_times.back();
    if (analytic_moments(c.motion)) {
        const auto r = phi_quadrature(c.motion, c.eigen, c.law, spec.x0, spec.phi);
        if (r.divergent) c.out.warnings.push_back("phi is infinite; sigma is not meaningfully estimable in L^2");
    }
    if (!has_absorption(c.motion)) {
        const double q = pgf_extinction(c.law);
        add(c.out, t, "pgf_extinction", exact(q));
        c.out.diagnostics.push_back({"eta plateau = pgf extinction within 4 SE",
                                     z_score(eta_last.value, q, eta_last.std_error) <= 4.0,
                                     "eta " + num(eta_last.value) + " +- " + num(eta_last.std_error) + ", pgf " + num(q)});
    }
    if (!use_d) {
        c.out.warnings.push_back("sigma skipped: h is a surrogate for this motion; set surrogate = true to estimate it");
        return;
    }

    std::size_t truncated = 0;
    for (const auto& r : reps) truncated += r.truncated ? 1 : 0;
    auto below = [&](double eps) {
        std::size_t n = 0;
        for (const auto& r : reps)
            if (!r.truncated && r.d_final < eps) ++n;
        return proportion_estimate(n, reps.size(), 0);
    };
    const auto sigma = below(spec.epsilon);
    add(c.out, t, "sigma", sigma);
    double lo = sigma.value;
    double hi = sigma.value;
    for (double eps : kEpsilonSweep) {
        const auto s = below(eps);
        lo = std::min(lo, s.value);
        hi = std::max(hi, s.value);
        add(c.out, t, "sigma[eps=" + num(eps) + "]", s);
    }
    if (hi - lo > 2.0 * sigma.std_error) {
        c.out.warnings.push_back("sigma estimate is epsilon-sensitive: range " + num(hi - lo) + " over the sweep");
    }
    c.out.summary["truncated_replicas"]["final"] = truncated;
    const double jse = joint_se(sigma, eta_last);
    c.out.diagnostics.push_back({"sigma >= eta - 2 joint SE", sigma.value >= eta_last.value - 2.0 * jse,
                                 "sigma " + num(sigma.value) + ", eta " + num(eta_last.value)});
    if (!has_absorption(c.motion)) {
        c.out.diagnostics.push_back({"sigma = eta within 4 joint SE", z_score(sigma.value, eta_last.value, jse) <= 4.0,
                                     "sigma " + num(sigma.value) + ", eta " + num(eta_last.value)});
    }
}

void min_h_kind(Context& c) {
    const auto& spec = c.spec;
    const std::size_t nt = spec.snapshot_times.size();
    struct Rep {
        std::vector<double> min_h;
        std::vector<double> max_h;
        std::vector<char> crossed;
        std::vector<char> truncated;
        bool survived_final;
    };
    const auto reps = map_replicas(c.motion, c.law, spec.x0, engine_config(spec, spec.seed), spec.replicas, c.threads,
                                   [&](std::size_t, const std::vector<PopulationSnapshot>& snaps) {
                                       Rep r;
                                       for (const auto& s : snaps) {
                                           r.min_h.push_back(s.truncated ? kNaN : min_h_statistic(s, c.eigen));
                                           r.max_h.push_back(s.truncated ? kNaN : max_h_statistic(s, c.eigen));
                                           r.crossed.push_back(s.barrier_crossed ? 1 : 0);
                                           r.truncated.push_back(s.truncated ? 1 : 0);
                                       }
                                       r.survived_final = !snaps.back().truncated && !snaps.back().live_states.empty();
                                       return r;
                                   });

    std::vector<double> q_first_last;
    for (std::size_t k = 0; k < nt; ++k) {
        const double t = spec.snapshot_times[k];
        std::vector<double> mins;
        std::vector<double> maxs;
        std::size_t excluded = 0;
        std::size_t no_cross = 0;
        std::size_t alive = 0;
        for (const auto& r : reps) {
            if (r.truncated[k]) {
                ++excluded;
                continue;
            }
            if (!r.crossed[k]) ++no_cross;
            if (!std::isinf(r.min_h[k])) ++alive;
            if (!r.survived_final) continue;
            mins.push_back(r.min_h[k]);
            maxs.push_back(r.max_h[k]);
        }
        const std::size_t counted = reps.size() - excluded;
        auto q10 = quantile_estimate(mins, 0.1, excluded);
        add(c.out, t, "min_h_q10|survival", q10);
        add(c.out, t, "max_h_q10|survival", quantile_estimate(maxs, 0.1, excluded));
        add(c.out, t, "no_zero_crossing", proportion_estimate(no_cross, counted, excluded));
        add(c.out, t, "survival", proportion_estimate(alive, counted, excluded));
        if (k == 0 || k + 1 == nt) q_first_last.push_back(q10.value);
    }
    if (q_first_last.size() == 2) {
        c.out.diagnostics.push_back({"10th percentile of min h at last time >= at first time",
                                     q_first_last[1] >= q_first_last[0],
                                     num(q_first_last[1]) + " vs " + num(q_first_last[0])});
    }
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads) {
    if (!spec.motion || !spec.law) throw ConfigError("experiment spec is incomplete");
    ExperimentResult out;
    MotionModel motion = *spec.motion;
    if (const auto* cp = std::get_if<ContactProcess>(&motion); cp && !cp->decay_rate()) {
        const double lambda = estimate_contact_decay_rate(*cp, spec.decay_paths, spec.seed);
        out.summary["contact_decay_rate_estimate"] = lambda;
        motion = cp->with_decay_rate(lambda);
        if (spec.kind != "l2-threshold-scan") spec.law->require_supercritical(lambda);
    }
    Context c{spec, motion, eigen_data(motion), *spec.law, threads, out};
    out.summary["lambda"] = c.eigen.lambda;
    out.summary["surrogate_h"] = c.eigen.surrogate_h;
    if (!c.eigen.note.empty()) out.summary["eigen_note"] = c.eigen.note;

    if (spec.kind == "many-to-one-check") moment_check(c, false);
    else if (spec.kind == "many-to-two-check") moment_check(c, true);
    else if (spec.kind == "martingale-curve") martingale_curve_kind(c);
    else if (spec.kind == "phi") phi_kind(c);
    else if (spec.kind == "l2-threshold-scan") l2_scan_kind(c);
    else if (spec.kind == "qsd-fit") qsd_kind(c);
    else if (spec.kind == "eta-sigma") eta_sigma_kind(c);
    else if (spec.kind == "min-h-diagnostic") min_h_kind(c);
    else throw ConfigError("unknown experiment kind '" + spec.kind + "'");
    return out;
}

std::string results_csv(const ExperimentResult& result) {
    std::string out = "time,estimator,value,std_error,n_effective,excluded_truncated\n";
    char buf[160];
    for (const auto& r : result.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,", r.time);
        out += buf;
        out += csv_field(r.estimator);
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%zu,%zu\n", r.estimate.value, r.estimate.std_error,
                      r.estimate.n_effective, r.estimate.excluded_truncated);
        out += buf;
    }
    return out;
}

nlohmann::json metadata_json(const ExperimentSpec& spec, const ExperimentResult& result, double wall_seconds,
                             unsigned threads) {
    nlohmann::json j;
    j["library_version"] = BMP_VERSION;
    j["kind"] = spec.kind;
    j["spec"] = spec.echo;
    j["seed"] = spec.seed;
    j["seed_derivation"] =
        "replica r: mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(r + 0x9E3779B97F4A7C15 * (tag + 1)))), tag 0";
    j["replicas"] = spec.replicas;
    j["threads"] = threads;
    j["wall_seconds"] = wall_seconds;
    j["summary"] = result.summary;
    j["warnings"] = result.warnings;
    nlohmann::json diags = nlohmann::json::array();
    for (const auto& d : result.diagnostics) diags.push_back({{"name", d.name}, {"passed", d.passed}, {"detail", d.detail}});
    j["diagnostics"] = diags;
    return j;
}

int simulate_command(const std::string& spec_path, const std::vector<std::string>& overrides, const RunOptions& options,
                     std::ostream& log) {
    ExperimentSpec spec;
    try {
        spec = load_spec(spec_path, overrides);
    } catch (const ConfigError& e) {
        log << "configuration error:\n";
        for (const auto& issue : e.issues()) log << "  - " << issue << "\n";
        return kExitConfigError;
    }

    const unsigned threads = resolve_thread_count(options.threads ? options.threads : spec.threads);
    const std::string dir = options.out_dir.value_or(spec.output);
    ExperimentResult result;
    const auto start = std::chrono::steady_clock::now();
    try {
        result = run_experiment(spec, threads);
    } catch (const ConfigError& e) {
        log << "configuration error:\n";
        for (const auto& issue : e.issues()) log << "  - " << issue << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::filesystem::create_directories(dir);
    const auto write = [&](const std::string& name, const std::string& contents) {
        std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
        f << contents;
    };
    write("results.csv", results_csv(result));
    write("metadata.json", metadata_json(spec, result, wall, threads).dump(2) + "\n");
    for (const auto& [name, contents] : result.extra_files) write(name, contents);

    for (const auto& w : result.warnings) log << "warning: " << w << "\n";
    bool all_passed = true;
    for (const auto& d : result.diagnostics) {
        log << (d.passed ? "PASS " : "FAIL ") << d.name << " (" << d.detail << ")\n";
        all_passed = all_passed && d.passed;
    }
    log << "wrote " << dir << "/results.csv\n";
    if (options.assert_diagnostics && !all_passed) return kExitDiagnosticFailure;
    return kExitOk;
}

}  // namespace bmp
