#include <gtest/gtest.h>

#include <sstream>

#include "latalloc/netmodel.hpp"
#include "oracles.hpp"

using namespace latalloc;
using namespace latalloc::net;

namespace {

const ApplicantId kA{0};
const ResourceId kR{0};

Topology single(double base, double jitter, std::vector<FailureWindow> failures = {}) {
    return Topology(1, 1, {base}, jitter, std::move(failures));
}

}  // namespace

TEST(Probe, ZeroJitterIsExact) {
    Rng rng(1);
    const auto s = probe(single(20, 0), kA, kR, 5, 0.0, rng);
    ASSERT_TRUE(s);
    EXPECT_EQ(*s, std::vector<double>(5, 20.0));
}

TEST(Probe, CoLocatedIsZero) {
    Rng rng(1);
    const auto s = probe(single(0, 0.5), kA, kR, 4, 0.0, rng);
    ASSERT_TRUE(s);
    EXPECT_EQ(*s, std::vector<double>(4, 0.0));
}

TEST(Probe, FailedResourceIsUnreachable) {
    Rng rng(1);
    EXPECT_FALSE(probe(single(20, 0, {{kR, 10, 20}}), kA, kR, 3, 15.0, rng));
}

TEST(Probe, Errors) {
    Rng rng(1);
    const auto t = single(20, 0);
    EXPECT_THROW((void)probe(t, kA, kR, 0, 0.0, rng), Error);
    EXPECT_THROW((void)probe(t, ApplicantId{1}, kR, 1, 0.0, rng), Error);
    EXPECT_THROW((void)probe(t, kA, ResourceId{1}, 1, 0.0, rng), Error);
}

TEST(Probe, SamplesStayInsideJitterBand) {
    Rng rng(2);
    for (int k = 0; k < 500; ++k) {
        const double base = rng.uniform(0, 500);
        const double f = rng.uniform(0, 1);
        const auto s = probe(single(base, f), kA, kR, 8, 0.0, rng);
        for (double v : *s) {
            EXPECT_GE(v, 0.0);
            EXPECT_GE(v, base * (1 - f) * (1 - 1e-15));
            EXPECT_LE(v, base * (1 + f) * (1 + 1e-15));
        }
    }
}

TEST(Probe, MeanConvergesToBase) {
    Rng rng(3);
    for (double base : {1.0, 20.0, 480.0}) {
        const auto s = probe(single(base, 0.5), kA, kR, 10000, 0.0, rng);
        EXPECT_LT(std::abs(oracle::mean(*s) - base) / base, 0.02);
    }
}

TEST(Probe, FailureWindowIsHalfOpen) {
    Rng rng(4);
    const auto t = single(20, 0, {{kR, 100, 300}});
    EXPECT_TRUE(probe(t, kA, kR, 1, 99.999, rng));
    EXPECT_FALSE(probe(t, kA, kR, 1, 100.0, rng));
    EXPECT_FALSE(probe(t, kA, kR, 1, 299.999, rng));
    EXPECT_TRUE(probe(t, kA, kR, 1, 300.0, rng));
}

TEST(Topology, Validation) {
    EXPECT_THROW(Topology(1, 1, {-1.0}, 0.0), Error);
    EXPECT_THROW(Topology(1, 1, {1.0}, 1.5), Error);
    EXPECT_THROW(Topology(1, 2, {1.0}, 0.0), Error);
    EXPECT_THROW(Topology(1, 1, {1.0}, 0.0, {{kR, 5, 5}}), Error);
}

TEST(GenerateTopology, DegenerateRange) {
    Rng rng(5);
    const auto t = generate_topology(3, 4, {5, 5}, 0.1, rng);
    for (std::uint32_t a = 0; a < 3; ++a) {
        for (std::uint32_t r = 0; r < 4; ++r) EXPECT_EQ(t.base_latency(ApplicantId{a}, ResourceId{r}), 5.0);
    }
}

TEST(GenerateTopology, EntriesInRange) {
    Rng rng(6);
    const auto t = generate_topology(2, 2, {1, 500}, 0.1, rng);
    for (std::uint32_t a = 0; a < 2; ++a) {
        for (std::uint32_t r = 0; r < 2; ++r) {
            const double v = t.base_latency(ApplicantId{a}, ResourceId{r});
            EXPECT_GE(v, 1.0);
            EXPECT_LE(v, 500.0);
        }
    }
}

TEST(GenerateTopology, SameSeedSameTopology) {
    Rng a(7);
    Rng b(7);
    EXPECT_EQ(generate_topology(4, 6, {1, 500}, 0.2, a), generate_topology(4, 6, {1, 500}, 0.2, b));
}

TEST(TopologyArchive, RoundTripIsExact) {
    Rng rng(8);
    TopologyArchive archive{0xfeedbeefcafeULL,
                            generate_topology(3, 5, {1, 500}, 0.137, rng, {{ResourceId{2}, 1.5, 7.25}})};
    std::stringstream ss;
    write_topology(ss, archive);
    const auto back = read_topology(ss);
    EXPECT_EQ(back.seed, archive.seed);
    EXPECT_EQ(back.topology, archive.topology);
}

TEST(TopologyArchive, MalformedInputNamesTheLine) {
    std::istringstream bad("version 1\nseed 3\napplicants one\n");
    try {
        (void)read_topology(bad);
        FAIL() << "expected a parse error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    std::istringstream wrong_version("version 2\n");
    EXPECT_THROW((void)read_topology(wrong_version), Error);
    std::istringstream missing("version 1\nseed 3\napplicants 1\nresources 1\njitter 0\n");
    EXPECT_THROW((void)read_topology(missing), Error);
}
