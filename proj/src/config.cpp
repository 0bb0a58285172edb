#include "bmp/config.hpp"

#include "bmp/errors.hpp"
#include "bmp/statistics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace bmp {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Strips a trailing comment, leaving '#' inside double quotes alone.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

json parse_value(const std::string& raw) {
    const std::string v = trim(raw);
    json parsed = json::parse(v, nullptr, false);
    if (!parsed.is_discarded()) return parsed;
    return json(v);
}

std::pair<std::string, json> parse_assignment(const std::string& text, const std::string& where) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected `key = value`");
    std::string key = trim(text.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    for (char c : key) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) {
            throw ConfigError(where + ": invalid character in key '" + key + "'");
        }
    }
    return {key, parse_value(text.substr(eq + 1))};
}

class Reader {
public:
    Reader(const KeyTree& tree, IssueList& issues) : tree_(tree), issues_(issues) {}

    std::optional<double> number(const std::string& key) {
        if (!tree_.has(key)) return std::nullopt;
        const auto& v = tree_.at(key);
        if (v.is_number()) return v.get<double>();
        if (v.is_string()) {
            try {
                return parse_bound(v);
            } catch (const ConfigError&) {
            }
        }
        issues_.add(key + " must be a number");
        return std::nullopt;
    }

    std::optional<std::int64_t> integer(const std::string& key) {
        if (!tree_.has(key)) return std::nullopt;
        const auto& v = tree_.at(key);
        if (v.is_number_integer()) return v.get<std::int64_t>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
        }
        issues_.add(key + " must be an integer");
        return std::nullopt;
    }

    std::optional<std::string> text(const std::string& key) {
        if (!tree_.has(key)) return std::nullopt;
        const auto& v = tree_.at(key);
        if (v.is_string()) return v.get<std::string>();
        issues_.add(key + " must be a string");
        return std::nullopt;
    }

    std::optional<bool> boolean(const std::string& key) {
        if (!tree_.has(key)) return std::nullopt;
        const auto& v = tree_.at(key);
        if (v.is_boolean()) return v.get<bool>();
        issues_.add(key + " must be true or false");
        return std::nullopt;
    }

    std::optional<std::vector<double>> numbers(const std::string& key) {
        if (!tree_.has(key)) return std::nullopt;
        const auto& v = tree_.at(key);
        std::vector<double> out;
        if (v.is_number()) return std::vector<double>{v.get<double>()};
        if (!v.is_array()) {
            issues_.add(key + " must be a list of numbers");
            return std::nullopt;
        }
        for (const auto& e : v) {
            if (!e.is_number()) {
                issues_.add(key + " must be a list of numbers");
                return std::nullopt;
            }
            out.push_back(e.get<double>());
        }
        return out;
    }

    // [[a, b], ...] with numeric entries.
    std::optional<std::vector<std::pair<double, double>>> pairs(const std::string& key) {
        if (!tree_.has(key)) return std::nullopt;
        const auto& v = tree_.at(key);
        std::vector<std::pair<double, double>> out;
        bool ok = v.is_array();
        if (ok) {
            for (const auto& e : v) {
                if (!e.is_array() || e.size() != 2) {
                    ok = false;
                    break;
                }
                try {
                    out.emplace_back(parse_bound(e[0]), parse_bound(e[1]));
                } catch (const ConfigError&) {
                    ok = false;
                    break;
                }
            }
        }
        if (!ok) {
            issues_.add(key + " must be a list of [x, y] pairs");
            return std::nullopt;
        }
        return out;
    }

    const KeyTree& tree() const { return tree_; }

private:
    const KeyTree& tree_;
    IssueList& issues_;
};

template <typename F>
void collect(IssueList& issues, F&& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        for (const auto& i : e.issues()) issues.add(i);
    }
}

std::optional<MotionModel> read_motion(Reader& in, IssueList& issues) {
    const auto kind = in.text("motion.kind");
    if (!kind) {
        if (!in.tree().has("motion.kind")) issues.add("motion.kind is required");
        return std::nullopt;
    }
    std::optional<MotionModel> out;
    auto need = [&](const std::string& key) {
        auto v = in.number(key);
        if (!v && !in.tree().has(key)) issues.add(key + " is required for motion.kind = " + *kind);
        return v;
    };

    if (*kind == "ergodic-ctmc") {
        if (!in.tree().has("motion.Q")) {
            out = ErgodicCTMC::default_example();
            return out;
        }
        const auto& q = in.tree().at("motion.Q");
        std::vector<std::vector<double>> rows;
        bool ok = q.is_array();
        if (ok) {
            for (const auto& r : q) {
                if (!r.is_array()) {
                    ok = false;
                    break;
                }
                std::vector<double> row;
                for (const auto& e : r) {
                    if (!e.is_number()) {
                        ok = false;
                        break;
                    }
                    row.push_back(e.get<double>());
                }
                rows.push_back(row);
            }
        }
        if (!ok) {
            issues.add("motion.Q must be a matrix (list of numeric rows)");
            return std::nullopt;
        }
        collect(issues, [&] { out = ErgodicCTMC(rows); });
    } else if (*kind == "galton-watson") {
        const auto rho = in.pairs("motion.rho");
        if (!rho) {
            if (!in.tree().has("motion.rho")) issues.add("motion.rho is required for motion.kind = galton-watson");
            return std::nullopt;
        }
        std::vector<GaltonWatson::Jump> jumps;
        for (const auto& [y, p] : *rho) {
            if (y != static_cast<double>(static_cast<int>(y))) {
                issues.add("motion.rho jump sizes must be integers");
                return std::nullopt;
            }
            jumps.push_back({static_cast<int>(y), p});
        }
        collect(issues, [&] { out = GaltonWatson(jumps); });
    } else if (*kind == "contact") {
        const auto d = in.integer("motion.d");
        const auto gamma = need("motion.gamma");
        const auto lambda = in.number("motion.lambda");
        if (!in.tree().has("motion.d")) issues.add("motion.d is required for motion.kind = contact");
        if (d && gamma) collect(issues, [&] { out = ContactProcess(static_cast<int>(*d), *gamma, lambda); });
    } else if (*kind == "killed-ou") {
        if (const auto l = need("motion.lambda")) out = KilledOU{*l};
    } else if (*kind == "transient-ou") {
        const auto l = need("motion.lambda");
        const auto s2 = need("motion.sigma2");
        if (l && s2) out = TransientOU{*l, *s2};
    } else if (*kind == "killed-drift-bm") {
        if (const auto c = need("motion.c")) out = KilledDriftBM{*c};
    } else {
        issues.add("motion.kind '" + *kind +
                   "' is not one of ergodic-ctmc, galton-watson, contact, killed-ou, transient-ou, killed-drift-bm");
        return std::nullopt;
    }
    if (out) {
        const std::size_t before = issues.items().size();
        collect(issues, [&] { validate(*out); });
        if (issues.items().size() != before) out.reset();
    }
    return out;
}

std::optional<State> read_x0(Reader& in, const MotionModel& motion, IssueList& issues) {
    const auto& tree = in.tree();
    if (const auto* cp = std::get_if<ContactProcess>(&motion)) {
        if (!tree.has("x0")) {
            return canonicalize(cp->dim(), std::vector<std::int32_t>(static_cast<std::size_t>(cp->dim()), 0));
        }
        const auto& v = tree.at("x0");
        std::vector<std::int32_t> coords;
        bool ok = v.is_array() && !v.empty();
        if (ok) {
            for (const auto& site : v) {
                if (!site.is_array() || site.size() != static_cast<std::size_t>(cp->dim())) {
                    ok = false;
                    break;
                }
                for (const auto& c : site) {
                    if (!c.is_number_integer()) {
                        ok = false;
                        break;
                    }
                    coords.push_back(c.get<std::int32_t>());
                }
            }
        }
        if (!ok) {
            issues.add("x0 must be a nonempty list of sites, each a list of d integers");
            return std::nullopt;
        }
        return canonicalize(cp->dim(), coords);
    }
    if (!tree.has("x0")) {
        issues.add("x0 is required");
        return std::nullopt;
    }
    if (std::holds_alternative<ErgodicCTMC>(motion) || std::holds_alternative<GaltonWatson>(motion)) {
        const auto n = in.integer("x0");
        if (!n) return std::nullopt;
        if (const auto* q = std::get_if<ErgodicCTMC>(&motion)) {
            if (*n < 1 || *n > static_cast<std::int64_t>(q->size())) {
                issues.add("x0 must be a state label in 1.." + std::to_string(q->size()));
                return std::nullopt;
            }
        } else if (*n < 1) {
            issues.add("x0 must be a population size >= 1");
            return std::nullopt;
        }
        return Count{*n};
    }
    const auto x = in.number("x0");
    if (!x) return std::nullopt;
    if (std::holds_alternative<TransientOU>(motion)) return Real{*x};
    if (!(*x > 0.0)) {
        issues.add("x0 must be > 0 for a killed motion");
        return std::nullopt;
    }
    return RealPos{*x};
}

std::string bound_text(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

double parse_bound(const nlohmann::json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw ConfigError("expected a number or \"inf\"");
}

KeyTree KeyTree::parse(const std::string& text) {
    KeyTree tree;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    IssueList issues;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        collect(issues, [&] {
            auto [k, v] = parse_assignment(body, "line " + std::to_string(lineno));
            tree.set(k, std::move(v));
        });
    }
    issues.throw_if_any();
    return tree;
}

void KeyTree::apply_overrides(const std::vector<std::string>& assignments) {
    IssueList issues;
    for (const auto& a : assignments) {
        collect(issues, [&] {
            auto [k, v] = parse_assignment(a, "--set " + a);
            set(k, std::move(v));
        });
    }
    issues.throw_if_any();
}

bool KeyTree::has(const std::string& key) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

const nlohmann::json& KeyTree::at(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.first == key) return e.second;
    throw ConfigError("missing key " + key);
}

void KeyTree::set(const std::string& key, nlohmann::json value) {
    for (auto& e : entries_) {
        if (e.first == key) {
            e.second = std::move(value);
            return;
        }
    }
    entries_.emplace_back(key, std::move(value));
}

nlohmann::json KeyTree::to_json() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : entries_) out[k] = v;
    return out;
}

std::vector<std::string> KeyTree::keys() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.first);
    return out;
}

ExperimentSpec parse_spec(const KeyTree& tree) {
    static const std::vector<std::string> known = {
        "kind",          "motion.kind",   "motion.Q",     "motion.rho",     "motion.d",
        "motion.gamma",  "motion.lambda", "motion.sigma2", "motion.c",      "motion.decay_paths",
        "branching.pmf", "branching.rate", "x0",          "horizon",        "snapshot_times",
        "replicas",      "paths",         "seed",         "threads",        "output",
        "population_cap", "sets",         "scan.ratios",  "epsilon",        "qsd.ks_bound",
        "phi.t_max",     "phi.tol",       "phi.fallback_paths", "surrogate",
    };
    IssueList issues;
    Reader in(tree, issues);
    ExperimentSpec spec;
    spec.echo = tree.to_json();

    for (const auto& k : tree.keys())
        if (std::find(known.begin(), known.end(), k) == known.end()) issues.add("unknown key '" + k + "'");

    if (const auto kind = in.text("kind")) {
        spec.kind = *kind;
        if (std::find(kExperimentKinds.begin(), kExperimentKinds.end(), spec.kind) == kExperimentKinds.end()) {
            issues.add("kind '" + spec.kind + "' is not a known experiment");
        }
    } else if (!tree.has("kind")) {
        issues.add("kind is required");
    }

    spec.motion = read_motion(in, issues);

    // Branching law. The scan derives r itself, so branching.rate is optional there.
    const bool scan = spec.kind == "l2-threshold-scan";
    const auto pmf = in.pairs("branching.pmf");
    auto rate = in.number("branching.rate");
    if (!tree.has("branching.pmf")) issues.add("branching.pmf is required");
    if (!rate && !tree.has("branching.rate")) {
        if (scan) rate = 1.0;
        else issues.add("branching.rate is required");
    }
    if (pmf && rate) {
        std::vector<BranchingLaw::Atom> atoms;
        bool ok = true;
        for (const auto& [k, p] : *pmf) {
            if (k != static_cast<double>(static_cast<int>(k))) ok = false;
            atoms.push_back({static_cast<int>(k), p});
        }
        if (!ok) issues.add("branching.pmf offspring counts must be integers");
        else collect(issues, [&] { spec.law = BranchingLaw(atoms, *rate); });
    }

    if (spec.motion) {
        if (auto x0 = read_x0(in, *spec.motion, issues)) spec.x0 = *x0;
    }

    if (const auto times = in.numbers("snapshot_times")) {
        spec.snapshot_times = *times;
        if (times->empty()) issues.add("snapshot_times must be nonempty");
        for (std::size_t i = 0; i < times->size(); ++i) {
            if (!((*times)[i] > 0.0)) issues.add("snapshot_times must be > 0");
            if (i > 0 && !((*times)[i] > (*times)[i - 1])) issues.add("snapshot_times must be strictly increasing");
        }
    } else if (!tree.has("snapshot_times")) {
        issues.add("snapshot_times is required");
    }
    spec.horizon = in.number("horizon").value_or(spec.snapshot_times.empty() ? 0.0 : spec.snapshot_times.back());
    if (!spec.snapshot_times.empty() && spec.horizon < spec.snapshot_times.back()) {
        issues.add("horizon must be >= the last snapshot time");
    }

    auto positive_count = [&](const std::string& key, std::size_t& dst) {
        if (const auto v = in.integer(key)) {
            if (*v < 1) issues.add(key + " must be >= 1");
            else dst = static_cast<std::size_t>(*v);
        }
    };
    positive_count("replicas", spec.replicas);
    positive_count("paths", spec.paths);
    positive_count("population_cap", spec.population_cap);
    positive_count("motion.decay_paths", spec.decay_paths);
    positive_count("phi.fallback_paths", spec.phi.fallback_paths);
    if (const auto v = in.integer("seed")) spec.seed = static_cast<std::uint64_t>(*v);
    if (const auto v = in.integer("threads")) {
        if (*v < 1) issues.add("threads must be >= 1");
        else spec.threads = static_cast<unsigned>(*v);
    }
    if (const auto v = in.text("output")) spec.output = *v;
    if (const auto v = in.number("epsilon")) {
        if (!(*v > 0.0)) issues.add("epsilon must be > 0");
        spec.epsilon = *v;
    }
    if (const auto v = in.number("qsd.ks_bound")) spec.ks_bound = *v;
    if (const auto v = in.number("phi.t_max")) {
        if (!(*v > 0.0)) issues.add("phi.t_max must be > 0");
        spec.phi.t_max = *v;
    }
    if (const auto v = in.number("phi.tol")) spec.phi.tol = *v;
    spec.phi.seed = spec.seed;
    if (const auto v = in.boolean("surrogate")) spec.surrogate = *v;

    if (const auto sets = in.pairs("sets")) {
        for (const auto& [a, b] : *sets) {
            collect(issues, [&, a = a, b = b] {
                spec.sets.push_back({"[" + bound_text(a) + "," + bound_text(b) + ")", TestSet::interval(a, b)});
            });
        }
    }
    if (const auto r = in.numbers("scan.ratios")) spec.scan_ratios = *r;

    // Kind-specific requirements.
    if ((spec.kind == "many-to-one-check" || spec.kind == "many-to-two-check") && spec.sets.empty()) {
        issues.add(spec.kind + " needs at least one test set in `sets`");
    }
    if (scan) {
        if (spec.scan_ratios.empty()) issues.add("l2-threshold-scan needs scan.ratios");
        for (double k : spec.scan_ratios)
            if (!(k > 0.0)) issues.add("scan.ratios entries must be > 0");
    }
    if (spec.kind == "qsd-fit" && spec.motion && !qsd_cdf(*spec.motion).has_value()) {
        issues.add("qsd-fit needs a killed diffusion (killed-ou or killed-drift-bm)");
    }
    if (spec.motion && std::holds_alternative<ContactProcess>(*spec.motion) && !spec.surrogate &&
        spec.kind != "many-to-one-check" && spec.kind != "many-to-two-check" && spec.kind != "eta-sigma") {
        issues.add(spec.kind + " on the contact process uses h; set surrogate = true to accept h(z) = |z|");
    }
    if (spec.kind == "many-to-two-check" && spec.law && !(spec.law->split_rate() > 0.0)) {
        issues.add("many-to-two-check needs (m2 - m1) r > 0");
    }

    // Supercriticality against the motion's lambda, when lambda is already known.
    if (spec.motion && spec.law && !scan) {
        std::optional<double> lambda;
        if (const auto* cp = std::get_if<ContactProcess>(&*spec.motion)) lambda = cp->decay_rate();
        else collect(issues, [&] { lambda = eigen_data(*spec.motion).lambda; });
        if (lambda) collect(issues, [&] { spec.law->require_supercritical(*lambda); });
    }
    if (scan && spec.law && !(spec.law->m1() > 1.0)) issues.add("l2-threshold-scan needs m1 > 1");

    issues.throw_if_any();
    return spec;
}

ExperimentSpec load_spec(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read experiment file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    KeyTree tree = KeyTree::parse(buf.str());
    tree.apply_overrides(overrides);
    return parse_spec(tree);
}

}  // namespace bmp
