#include "bmp/config.hpp"
#include "bmp/errors.hpp"
#include "bmp/experiment.hpp"

#include <doctest.h>

#include <algorithm>

using namespace bmp;

namespace {

const char* kBase =
    "kind = many-to-one-check\n"
    "motion.kind = killed-ou   # classic\n"
    "motion.lambda = 1\n"
    "branching.pmf = [[0, 0.2], [2, 0.8]]\n"
    "branching.rate = 2.5\n"
    "x0 = 1\n"
    "snapshot_times = [0.5, 1]\n"
    "sets = [[0, 1], [1, \"inf\"]]\n"
    "replicas = 200\n"
    "paths = 4000\n";

bool mentions(const ConfigError& e, const std::string& needle) {
    return std::any_of(e.issues().begin(), e.issues().end(),
                       [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("a valid file parses") {
    const auto spec = parse_spec(KeyTree::parse(kBase));
    CHECK(spec.kind == "many-to-one-check");
    CHECK(std::holds_alternative<KilledOU>(*spec.motion));
    CHECK(spec.law->m1() == doctest::Approx(1.6));
    CHECK(spec.x0 == State{RealPos{1.0}});
    CHECK(spec.horizon == 1.0);
    REQUIRE(spec.sets.size() == 2);
    CHECK(spec.sets[1].label == "[1,inf)");
    CHECK(spec.seed == kDefaultSeed);
}

TEST_CASE("overrides win over the file") {
    auto tree = KeyTree::parse(kBase);
    tree.apply_overrides({"replicas=50", "motion.lambda = 0.5", "output=runs/a"});
    const auto spec = parse_spec(tree);
    CHECK(spec.replicas == 50);
    CHECK(std::get<KilledOU>(*spec.motion).lambda == 0.5);
    CHECK(spec.output == "runs/a");
}

TEST_CASE("every problem is reported at once") {
    auto tree = KeyTree::parse(kBase);
    tree.apply_overrides({"snapshot_times=[]", "colour=blue", "replicas=0", "branching.rate=-1"});
    try {
        parse_spec(tree);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "snapshot_times must be nonempty"));
        CHECK(mentions(e, "unknown key 'colour'"));
        CHECK(mentions(e, "replicas must be >= 1"));
        CHECK(e.issues().size() >= 4);
    }
}

TEST_CASE("subcritical combinations are rejected") {
    auto tree = KeyTree::parse(kBase);
    tree.apply_overrides({"branching.rate=1"});  // r(m1 - 1) = 0.6 < lambda = 1
    CHECK_THROWS_AS(parse_spec(tree), ConfigError);
}

TEST_CASE("kind-specific requirements") {
    auto tree = KeyTree::parse(kBase);
    tree.apply_overrides({"kind=qsd-fit", "motion.kind=transient-ou", "motion.sigma2=1", "x0=0"});
    try {
        parse_spec(tree);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "qsd-fit needs a killed diffusion"));
    }
    auto contact = KeyTree::parse(
        "kind = phi\nmotion.kind = contact\nmotion.d = 1\nmotion.gamma = 0.5\nmotion.lambda = 0.4\n"
        "branching.pmf = [[2, 1]]\nbranching.rate = 1\nsnapshot_times = [1]\n");
    try {
        parse_spec(contact);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "surrogate"));
    }
    contact.apply_overrides({"surrogate=true"});
    const auto spec = parse_spec(contact);
    CHECK(spec.x0 == canonicalize(1, {0}));
}

TEST_CASE("the ergodic chain takes a generator or the built-in example") {
    auto tree = KeyTree::parse(kBase);
    tree.apply_overrides({"motion.kind=ergodic-ctmc", "x0=2", "sets=[[1,3]]"});
    const auto spec = parse_spec(tree);
    CHECK(std::get<ErgodicCTMC>(*spec.motion).size() == 5);
    tree.apply_overrides({"motion.Q=[[-1, 1], [2, -2]]", "x0=3"});
    try {
        parse_spec(tree);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(mentions(e, "x0 must be a state label in 1..2"));
    }
}

TEST_CASE("malformed lines") {
    CHECK_THROWS_AS(KeyTree::parse("just words\n"), ConfigError);
    CHECK_THROWS_AS(KeyTree::parse("= 3\n"), ConfigError);
    const auto tree = KeyTree::parse("# only a comment\n\nmotion.kind = killed-ou\n");
    CHECK(tree.at("motion.kind") == "killed-ou");
}

TEST_CASE("results are independent of the thread count") {
    const auto spec = parse_spec(KeyTree::parse(kBase));
    const auto a = results_csv(run_experiment(spec, 1));
    const auto b = results_csv(run_experiment(spec, 3));
    CHECK(a == b);
    CHECK(a.rfind("time,estimator,value,std_error,n_effective,excluded_truncated", 0) == 0);
}
