#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "latalloc/scenario.hpp"
#include "latalloc/text.hpp"

using namespace latalloc;
using namespace latalloc::scenario;
namespace fs = std::filesystem;

namespace {

Scenario parse(const std::string& text) {
    std::istringstream is(text);
    return parse_scenario(is, "test.scn");
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) out.push_back(line);
    return out;
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("latalloc_scn_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                 "_" + std::to_string(counter++) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    [[nodiscard]] const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

const char* kMinimal = R"(version = 1
scenario_id = mini
num_tasks = 100
seed = 3
)";

void run_into(const Scenario& s, const fs::path& dir, RunOptions opts = {}) {
    opts.out_dir = dir;
    std::ostringstream log;
    run_scenario(s, opts, log);
}

}  // namespace

TEST(ParseScenario, ReadsKeysCommentsAndRanges) {
    const auto s = parse(R"(# sweep
version = 1
scenario_id = grid   # trailing comment
task_counts = 100, 300
num_resources = 40
replications = 4
policy = lo
latency_range = 2, 250
alpha_w = 0.3
beta_w = 0.7
lambda = 2.5
failures = 1:10:20, 3:5.5:9
)");
    EXPECT_EQ(s.scenario_id, "grid");
    EXPECT_EQ(s.task_counts, (std::vector<std::size_t>{100, 300}));
    EXPECT_EQ(s.base.num_resources, 40u);
    EXPECT_EQ(s.replications, 4u);
    EXPECT_EQ(s.policies, std::vector{agent::Policy::latency_optimized});
    EXPECT_EQ(s.base.latency_range, (sim::Range{2, 250}));
    EXPECT_EQ(s.base.bid_params.alpha_w, 0.3);
    EXPECT_EQ(s.base.blend_params.lambda, 2.5);
    ASSERT_EQ(s.base.failures.size(), 2u);
    EXPECT_EQ(s.base.failures[1].fail_at, 5.5);
}

TEST(ParseScenario, ErrorsCarryLineNumbers) {
    auto expect_line = [](const std::string& text, std::size_t line) {
        try {
            (void)parse(text);
            ADD_FAILURE() << "no error for:\n" << text;
        } catch (const ParseError& e) {
            EXPECT_EQ(e.line(), line) << e.what();
            EXPECT_NE(std::string(e.what()).find("test.scn:" + std::to_string(line)),
                      std::string::npos);
        }
    };
    expect_line("version = 1\nbogus = 3\n", 2);
    expect_line("version = 1\n\nnum_tasks = ten\n", 3);
    expect_line("version = 1\nseed = 1\nseed = 2\n", 3);
    expect_line("version = 1\njust words\n", 2);
    expect_line("version = 2\n", 1);
    expect_line("latency_range = 1\nversion = 1\n", 1);
    expect_line("num_tasks = 10\n", 1);
}

TEST(RunScenario, MinimalScenarioWritesTwoRowsAndSummary) {
    TempDir dir;
    run_into(parse(kMinimal), dir.path());
    const auto csv = lines(slurp(dir.path() / "results.csv"));
    ASSERT_EQ(csv.size(), 3u);
    EXPECT_EQ(csv[0],
              "scenario_id,policy,seed,num_tasks,num_resources,theta,lambda,mean_response_time,"
              "finished,rejected,wall_clock_ms");
    EXPECT_EQ(csv[1].rfind("mini,baseline,", 0), 0u);
    EXPECT_EQ(csv[2].rfind("mini,lo,", 0), 0u);

    const auto summary = nlohmann::json::parse(slurp(dir.path() / "summary.json"));
    ASSERT_EQ(summary["points"].size(), 1u);
    const auto& point = summary["points"][0];
    EXPECT_EQ(point["num_tasks"], 100);
    EXPECT_TRUE(point.contains("mean_response_time_baseline"));
    EXPECT_TRUE(point.contains("mean_lo_over_baseline"));
    EXPECT_TRUE(fs::exists(dir.path() / "topologies" / "p0_r0.topo"));
}

TEST(RunScenario, FullSweepRowCount) {
    TempDir dir;
    auto s = parse("version = 1\ntask_counts = 100,200,300,400,500,600,700,800,900,1000\n"
                   "replications = 10\n");
    s.jobs = 4;
    run_into(s, dir.path());
    EXPECT_EQ(lines(slurp(dir.path() / "results.csv")).size(), 201u);
}

TEST(RunScenario, InvalidWeightNamesFieldAndWritesNothing) {
    TempDir dir;
    const auto s = parse("version = 1\nalpha_w = 1.5\n");
    try {
        run_into(s, dir.path());
        FAIL() << "expected a validation error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("alpha_w"), std::string::npos);
    }
    EXPECT_FALSE(fs::exists(dir.path()));
}

TEST(RunScenario, RunningTwiceIsByteIdentical) {
    TempDir a;
    TempDir b;
    auto s = parse("version = 1\ntask_counts = 100, 200\nreplications = 3\n");
    run_into(s, a.path());
    s.jobs = 3;
    run_into(s, b.path());
    EXPECT_EQ(slurp(a.path() / "results.csv"), slurp(b.path() / "results.csv"));
    EXPECT_EQ(slurp(a.path() / "summary.json"), slurp(b.path() / "summary.json"));
}

TEST(RunScenario, AddingSweepPointsKeepsExistingRows) {
    TempDir a;
    TempDir b;
    run_into(parse("version = 1\ntask_counts = 100\nreplications = 2\n"), a.path());
    run_into(parse("version = 1\ntask_counts = 100, 150\nreplications = 2\n"), b.path());
    const auto small = lines(slurp(a.path() / "results.csv"));
    const auto large = lines(slurp(b.path() / "results.csv"));
    for (const auto& row : small) {
        EXPECT_NE(std::find(large.begin(), large.end(), row), large.end()) << row;
    }
}

TEST(RunScenario, SeedOverrideChangesRows) {
    TempDir a;
    TempDir b;
    const auto s = parse(kMinimal);
    run_into(s, a.path());
    RunOptions opts;
    opts.seed = 99;
    run_into(s, b.path(), opts);
    EXPECT_NE(slurp(a.path() / "results.csv"), slurp(b.path() / "results.csv"));
}

TEST(RunScenario, AllocationLog) {
    TempDir dir;
    RunOptions opts;
    opts.log_allocations = true;
    run_into(parse(kMinimal), dir.path(), opts);
    const auto rows = lines(slurp(dir.path() / "allocations.csv"));
    ASSERT_GT(rows.size(), 1u);
    EXPECT_EQ(rows[0].rfind("scenario_id,policy,seed,num_tasks,round_time", 0), 0u);
}

TEST(Replay, ReproducesTheArchivedRun) {
    TempDir first;
    TempDir second;
    const auto s = parse(kMinimal);
    run_into(s, first.path());
    std::ifstream topo(first.path() / "topologies" / "p0_r0.topo");
    const auto archive = net::read_topology(topo);

    RunOptions opts;
    opts.out_dir = second.path();
    std::ostringstream log;
    replay(archive, s, opts, log);
    EXPECT_EQ(slurp(first.path() / "results.csv"), slurp(second.path() / "results.csv"));
}

TEST(Replay, FlippedPolicyRunsOnTheFrozenTopology) {
    TempDir first;
    TempDir second;
    auto s = parse(kMinimal);
    s.policies = {agent::Policy::baseline};
    run_into(s, first.path());
    std::ifstream topo(first.path() / "topologies" / "p0_r0.topo");
    const auto archive = net::read_topology(topo);

    RunOptions opts;
    opts.out_dir = second.path();
    opts.policies = std::vector{agent::Policy::latency_optimized};
    std::ostringstream log;
    replay(archive, s, opts, log);
    const auto rows = lines(slurp(second.path() / "results.csv"));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].rfind("mini,lo," + std::to_string(archive.seed) + ",", 0), 0u);

    auto config = s.materialize(0, 0, agent::Policy::latency_optimized);
    config.seed = archive.seed;
    const auto direct = sim::run(config, archive.topology);
    EXPECT_NE(rows[1].find("," + latalloc::text::format_double(direct.mean_response_time) + ","), std::string::npos);
}

TEST(Replay, MismatchedDimensionsAreRejected) {
    TempDir dir;
    const auto s = parse(kMinimal);
    net::TopologyArchive archive{1, net::Topology(2, 3, std::vector<double>(6, 1.0), 0.0)};
    RunOptions opts;
    opts.out_dir = dir.path();
    std::ostringstream log;
    EXPECT_THROW(replay(archive, s, opts, log), Error);
    EXPECT_FALSE(fs::exists(dir.path()));
}
