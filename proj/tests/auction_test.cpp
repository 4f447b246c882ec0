#include <gtest/gtest.h>

#include <vector>

#include "latalloc/auction.hpp"
#include "latalloc/rng.hpp"
#include "oracles.hpp"

using namespace latalloc;
using namespace latalloc::auction;

namespace {

Resource priced(double lp, double hp = 0.0) {
    Resource r;
    r.cpu = 1.0;
    r.low_price = lp;
    r.high_price = hp > 0.0 ? hp : lp;
    return r;
}

// Unit budget b/l = 10.
Task applicant(std::size_t cap, double max_wait = 100.0) {
    Task t;
    t.length = 100.0;
    t.budget = 1000.0;
    t.deadline = 1000.0;
    t.remaining_resource_cap = cap;
    t.max_wait = max_wait;
    return t;
}

}  // namespace

TEST(MeanLowPrice, Examples) {
    EXPECT_DOUBLE_EQ(mean_low_price(std::vector{priced(2), priced(4), priced(6)}), 4.0);
    EXPECT_DOUBLE_EQ(mean_low_price(std::vector{priced(5)}), 5.0);
    EXPECT_DOUBLE_EQ(mean_low_price(std::vector{priced(1), priced(1), priced(1), priced(1)}), 1.0);
}

TEST(MeanLowPrice, EmptyOrAllQuarantinedIsAnError) {
    EXPECT_THROW((void)mean_low_price(std::vector<Resource>{}), Error);
    auto r = priced(3);
    r.status = ResourceStatus::quarantined;
    EXPECT_THROW((void)mean_low_price(std::vector{r}), Error);
    EXPECT_DOUBLE_EQ(mean_low_price(std::vector{r, priced(7)}), 7.0);
}

TEST(BidResource, Endpoints) {
    EXPECT_EQ(bid_resource(applicant(10), 10, 4.0, 2.5), 4.0);
    EXPECT_EQ(bid_resource(applicant(10), 0, 4.0, 2.5), 10.0);
}

TEST(BidResource, HandEvaluatedMidpoint) {
    const double expected = oracle::curve(4.0, 10.0, 1.0 - 5.0 / 10.0, 1.0);
    ASSERT_DOUBLE_EQ(expected, 7.0);
    EXPECT_DOUBLE_EQ(bid_resource(applicant(10), 5, 4.0, 1.0), 7.0);
}

TEST(BidResource, RemainingAboveCapIsAnError) {
    EXPECT_THROW((void)bid_resource(applicant(3), 4, 4.0, 1.0), Error);
}

TEST(BidResource, MonotoneAndBounded) {
    Rng rng(3);
    for (int k = 0; k < 500; ++k) {
        const std::size_t cap = 1 + rng.below(40);
        const double mean_lp = rng.uniform(0.5, 9.5);
        const double alpha = rng.uniform(0.1, 5.0);
        double prev = 1e300;
        for (std::size_t n = 0; n <= cap; ++n) {
            const double b = bid_resource(applicant(cap), n, mean_lp, alpha);
            EXPECT_LE(b, prev);
            EXPECT_GE(b, mean_lp);
            EXPECT_LE(b, 10.0);
            prev = b;
        }
    }
}

TEST(BidResource, LinearForUnitExponent) {
    // alpha = 1: value at the middle count is the mean of the endpoint values.
    const double lo = bid_resource(applicant(8), 8, 3.0, 1.0);
    const double hi = bid_resource(applicant(8), 0, 3.0, 1.0);
    EXPECT_DOUBLE_EQ(bid_resource(applicant(8), 4, 3.0, 1.0), 0.5 * (lo + hi));
}

TEST(MeanRemainingTime, AllNegativeGivesZero) {
    Task t = applicant(3);
    t.deadline = 5.0;  // 100 work units on cpu 1 never fit
    EXPECT_EQ(mean_remaining_time(t, std::vector{priced(1), priced(1)}, 0.0), 0.0);
}

TEST(MeanRemainingTime, NegativeTermsAreMasked) {
    // Remaining times 10, -5, 20 with cap 3: (10 + 20) / 3.
    Task t = applicant(3);
    t.length = 10.0;
    t.deadline = 30.0;
    std::vector<Resource> rs{priced(1), priced(1), priced(1)};
    rs[0].start_time = 10.0;  // 30 - 10 - 10 = 10
    rs[1].start_time = 25.0;  // 30 - 25 - 10 = -5
    rs[2].start_time = 0.0;   // 30 - 0 - 10 = 20
    EXPECT_DOUBLE_EQ(mean_remaining_time(t, rs, 0.0), 10.0);
}

TEST(MeanRemainingTime, SingleResource) {
    Task t = applicant(2);
    t.length = 4.0;
    t.deadline = 10.0;  // 10 - 0 - 4 = 6, over cap 2
    EXPECT_DOUBLE_EQ(mean_remaining_time(t, std::vector{priced(1)}, 0.0), 3.0);
}

TEST(BidTime, Endpoints) {
    EXPECT_EQ(bid_time(applicant(1, 100), 0.0, 4.0, 0.7), 10.0);
    EXPECT_EQ(bid_time(applicant(1, 100), 100.0, 4.0, 0.7), 4.0);
}

TEST(BidTime, HandEvaluated) {
    ASSERT_DOUBLE_EQ(oracle::curve(4.0, 10.0, 1.0 - 25.0 / 100.0, 1.0), 8.5);
    EXPECT_DOUBLE_EQ(bid_time(applicant(1, 100), 25.0, 4.0, 1.0), 8.5);
}

TEST(BidTime, ClampsOutOfRangeAverages) {
    EXPECT_EQ(bid_time(applicant(1, 100), 250.0, 4.0, 1.0), 4.0);
    EXPECT_EQ(bid_time(applicant(1, 100), -3.0, 4.0, 1.0), 10.0);
}

TEST(BidTime, InvalidMaxWait) {
    EXPECT_THROW((void)bid_time(applicant(1, 0.0), 1.0, 4.0, 1.0), Error);
    EXPECT_THROW((void)bid_time(applicant(1, -1.0), 1.0, 4.0, 1.0), Error);
}

TEST(BidTime, MonotoneAndBounded) {
    Rng rng(4);
    for (int k = 0; k < 500; ++k) {
        const double max_wait = rng.uniform(1, 500);
        const double mean_lp = rng.uniform(0.5, 9.5);
        const double beta = rng.uniform(0.1, 5.0);
        double prev = 1e300;
        for (int step = 0; step <= 50; ++step) {
            const double b = bid_time(applicant(1, max_wait), max_wait * step / 50.0, mean_lp, beta);
            EXPECT_LE(b, prev);
            EXPECT_GE(b, mean_lp);
            EXPECT_LE(b, 10.0);
            prev = b;
        }
    }
}

TEST(CombinedBid, Weights) {
    EXPECT_EQ(combined_bid(7.0, 8.5, BidParams{1, 1, 1.0, 0.0}), 7.0);
    EXPECT_EQ(combined_bid(7.0, 8.5, BidParams{1, 1, 0.0, 1.0}), 8.5);
    EXPECT_DOUBLE_EQ(combined_bid(7.0, 8.5, BidParams{1, 1, 0.5, 0.5}), 7.75);
}

TEST(BidParams, Validation) {
    EXPECT_NO_THROW(BidParams{}.validate());
    try {
        BidParams{1, 1, 1.5, 0.5}.validate();
        FAIL() << "expected a validation error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("alpha_w"), std::string::npos);
    }
    EXPECT_THROW((BidParams{0, 1, 0.5, 0.5}.validate()), Error);
    EXPECT_THROW((BidParams{1, -1, 0.5, 0.5}.validate()), Error);
    EXPECT_THROW((BidParams{1, 1, 0.0, 0.0}.validate()), Error);
}

TEST(ResourcePrice, Endpoints) {
    auto r = priced(2, 10);
    r.workload_ref = 100;
    r.start_time = 50;  // backlog 0 at t=50
    EXPECT_EQ(resource_price(r, 50.0, 0.3), 2.0);
    r.start_time = 150;  // backlog equals the reference workload
    EXPECT_EQ(resource_price(r, 50.0, 0.3), 10.0);
}

TEST(ResourcePrice, HandEvaluated) {
    auto r = priced(2, 10);
    r.workload_ref = 100;
    r.start_time = 25;  // backlog / workload = 0.25 at t=0
    ASSERT_DOUBLE_EQ(oracle::curve(2, 10, 0.25, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(resource_price(r, 0.0, 1.0), 4.0);
}

TEST(ResourcePrice, IdleResourceCostsLowPrice) {
    auto r = priced(3, 9);
    r.workload_ref = 0;
    r.start_time = 40;
    EXPECT_EQ(resource_price(r, 0.0, 1.0), 3.0);
}

TEST(ResourcePrice, MonotoneAndBounded) {
    Rng rng(8);
    for (int k = 0; k < 300; ++k) {
        auto r = priced(rng.uniform(1, 5));
        r.high_price = r.low_price * rng.uniform(1, 3);
        r.workload_ref = rng.uniform(1, 500);
        const double sigma = rng.uniform(0.1, 5);
        double prev = -1;
        for (int step = 0; step <= 40; ++step) {
            r.start_time = r.workload_ref * step / 40.0;
            const double p = resource_price(r, 0.0, sigma);
            EXPECT_GE(p, prev);
            EXPECT_GE(p, r.low_price);
            EXPECT_LE(p, r.high_price);
            prev = p;
        }
    }
}

TEST(FinalPrice, Examples) {
    EXPECT_EQ(final_price(10, 6), 8.0);
    EXPECT_EQ(final_price(5, 5), 5.0);
    EXPECT_DOUBLE_EQ(final_price(3.2, 1.6), 2.4);
}

TEST(FinalPrice, LiesBetweenInputs) {
    Rng rng(9);
    for (int k = 0; k < 1000; ++k) {
        const double a = rng.uniform(0, 1e3);
        const double b = rng.uniform(0, 1e3);
        const double f = final_price(a, b);
        EXPECT_GE(f, std::min(a, b));
        EXPECT_LE(f, std::max(a, b));
    }
}

TEST(MakeBid, CombinesBothCurves) {
    std::vector<Resource> rs{priced(2), priced(6)};  // mean lp 4
    Task t = applicant(2, 100);
    t.deadline = 1e6;
    const auto bid = make_bid(t, rs, 1, 0.0, BidParams{1, 1, 0.5, 0.5});
    EXPECT_DOUBLE_EQ(bid.bid_resource, 7.0);
    // Mean remaining time far exceeds max_wait, so the time bid sits at mean lp.
    EXPECT_DOUBLE_EQ(bid.bid_time, 4.0);
    EXPECT_DOUBLE_EQ(bid.combined, 5.5);
}
