#include "doctest.h"

#include "property_suites.hpp"

using chainsim::props::SuiteResult;

namespace {

void report(const SuiteResult& r) {
    INFO("suite " << r.name << " seed " << r.seed << " cases " << r.cases);
    for (const auto& m : r.messages) {
        INFO(m);
    }
    CHECK(r.cases >= 100);
    CHECK(r.failures == 0);
}

}  // namespace

TEST_CASE("property: galilean invariance (bit-identical error trajectories)") {
    report(chainsim::props::galilean_invariance(0xC0FFEE01, 100));
}

TEST_CASE("property: propagation cone bound") {
    report(chainsim::props::propagation_cone(0xC0FFEE02, 100));
}

TEST_CASE("property: homogeneity bit-equality") {
    report(chainsim::props::homogeneity_bit_equality(0xC0FFEE03, 100));
}

TEST_CASE("property: determinism and config round-trip") {
    report(chainsim::props::determinism_round_trip(0xC0FFEE04, 100));
}
