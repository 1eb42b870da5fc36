#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_util.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string spreadsheet_corpus() {
    return (testutil::data_dir() / "spreadsheet_corpus.jsonl").string();
}

std::string reflection_corpus() {
    return (testutil::data_dir() / "reflection_corpus.jsonl").string();
}

std::vector<json> parse_jsonl(const fs::path& path) {
    std::vector<json> records;
    std::istringstream in(testutil::read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) records.push_back(json::parse(line));
    }
    return records;
}

TEST(CliScoreTest, WritesScoredRecordsAndSummary) {
    const auto dir = testutil::make_temp_dir("score");
    std::string output;
    const int code =
        testutil::run_cli("score " + spreadsheet_corpus() + " --output-dir " + dir.string(),
                          &output);
    ASSERT_EQ(code, 0) << output;
    ASSERT_TRUE(fs::exists(dir / "scored.jsonl"));
    ASSERT_TRUE(fs::exists(dir / "score_summary.csv"));
    ASSERT_TRUE(fs::exists(dir / "effective_config.json"));

    const auto records = parse_jsonl(dir / "scored.jsonl");
    ASSERT_EQ(records.size(), 12u);
    const json& first = records[0];
    EXPECT_EQ(first.at("prompt_id"), "p1");
    EXPECT_EQ(first.at("rollout_id"), "r1");
    EXPECT_EQ(first.at("rtc"), 4);
    EXPECT_EQ(first.at("len"), 500);
    EXPECT_EQ(first.at("bucket"), "simple");
    EXPECT_EQ(first.at("correct"), true);
    EXPECT_NEAR(first.at("reward").get<double>(), 0.94653086064227765, 1e-9);
    EXPECT_NEAR(first.at("reflection_penalty").get<double>(), 0.30262854513423937, 1e-9);
    EXPECT_FALSE(first.contains("advantage"));

    const std::string summary = testutil::read_file(dir / "score_summary.csv");
    EXPECT_NE(summary.find("prompt_id,n_total,n_correct,mean_rtc_correct,std_rtc_correct,"
                           "mean_len_correct,std_len_correct,mean_reward\n"),
              std::string::npos);
    EXPECT_NE(summary.find("p2,4,1,2.000000000,0.000000000,300.000000000,0.000000000,"
                           "0.225000000\n"),
              std::string::npos);
}

TEST(CliScoreTest, EmitAdvantagesGroupsByPrompt) {
    const auto dir = testutil::make_temp_dir("adv");
    const int code = testutil::run_cli("score " + spreadsheet_corpus() + " --output-dir " +
                                       dir.string() + " --emit-advantages");
    ASSERT_EQ(code, 0);
    const auto records = parse_jsonl(dir / "scored.jsonl");
    ASSERT_EQ(records.size(), 12u);
    double p2_sum = 0.0;
    for (const auto& r : records) {
        ASSERT_TRUE(r.contains("advantage")) << r.dump();
        if (r.at("prompt_id") == "p2") p2_sum += r.at("advantage").get<double>();
        if (r.at("prompt_id") == "p2" && r.at("rollout_id") == "r1") {
            EXPECT_NEAR(r.at("advantage").get<double>(), 0.9, 1e-8);
        }
    }
    EXPECT_NEAR(p2_sum, 0.0, 1e-8);
}

TEST(CliScoreTest, RunsAreIdempotent) {
    const auto dir = testutil::make_temp_dir("idem");
    ASSERT_EQ(testutil::run_cli("score " + spreadsheet_corpus() + " --output-dir " +
                                dir.string()),
              0);
    const std::string first = testutil::read_file(dir / "scored.jsonl");
    ASSERT_EQ(testutil::run_cli("score " + spreadsheet_corpus() + " --output-dir " +
                                dir.string()),
              0);
    EXPECT_EQ(testutil::read_file(dir / "scored.jsonl"), first);
}

TEST(CliScoreTest, ParseFailureExitsTwoWithoutPartialOutput) {
    const auto dir = testutil::make_temp_dir("bad");
    const auto corpus = dir / "bad.jsonl";
    testutil::write_file(
        corpus,
        "{\"prompt_id\":\"p\",\"rollout_id\":\"r\",\"text\":\"t 1\",\"ground_truth\":\"1\"}\n"
        "{broken\n");
    const auto out_dir = dir / "out";
    std::string output;
    const int code = testutil::run_cli(
        "score " + corpus.string() + " --output-dir " + out_dir.string(), &output);
    EXPECT_EQ(code, 2);
    EXPECT_NE(output.find("line 2"), std::string::npos) << output;
    EXPECT_FALSE(fs::exists(out_dir / "scored.jsonl"));
}

TEST(CliScoreTest, DuplicateRecordExitsTwo) {
    const auto dir = testutil::make_temp_dir("dup");
    const auto corpus = dir / "dup.jsonl";
    const std::string record =
        "{\"prompt_id\":\"p\",\"rollout_id\":\"r\",\"text\":\"t 1\",\"ground_truth\":\"1\"}\n";
    testutil::write_file(corpus, record + record);
    EXPECT_EQ(testutil::run_cli("score " + corpus.string() + " --output-dir " +
                                (dir / "out").string()),
              2);
}

TEST(CliScoreTest, EmptyCorpusExitsThree) {
    const auto dir = testutil::make_temp_dir("empty");
    const auto corpus = dir / "empty.jsonl";
    testutil::write_file(corpus, "\n\n  \n");
    EXPECT_EQ(testutil::run_cli("score " + corpus.string() + " --output-dir " +
                                (dir / "out").string()),
              3);
}

TEST(CliScoreTest, BadConfigurationExitsFour) {
    const auto dir = testutil::make_temp_dir("cfg");
    EXPECT_EQ(testutil::run_cli("score " + spreadsheet_corpus() + " --output-dir " +
                                (dir / "a").string() + " --alpha 1.5"),
              4);
    const auto config = dir / "config.json";
    testutil::write_file(config, "{nope");
    EXPECT_EQ(testutil::run_cli("score " + spreadsheet_corpus() + " --config " +
                                config.string()),
              4);
    testutil::write_file(config, "{\"unknown_key\": 1}");
    EXPECT_EQ(testutil::run_cli("score " + spreadsheet_corpus() + " --config " +
                                config.string()),
              4);
    EXPECT_EQ(testutil::run_cli("score /nonexistent/corpus.jsonl"), 4);
    EXPECT_EQ(testutil::run_cli("score " + spreadsheet_corpus() + " --not-a-flag"), 4);
}

TEST(CliScoreTest, EffectiveConfigEchoesOverrides) {
    const auto dir = testutil::make_temp_dir("echo");
    ASSERT_EQ(testutil::run_cli("score " + spreadsheet_corpus() + " --output-dir " +
                                dir.string() + " --alpha 0.3 --n1 10"),
              0);
    const json cfg = json::parse(testutil::read_file(dir / "effective_config.json"));
    EXPECT_EQ(cfg.at("penalty").at("alpha").get<double>(), 0.3);
    EXPECT_EQ(cfg.at("penalty").at("n1").get<int>(), 10);
    EXPECT_EQ(cfg.at("output_dir"), dir.string());
}

TEST(CliAnalyzeTest, ReportsMatchHandTallies) {
    const auto dir = testutil::make_temp_dir("analyze");
    ASSERT_EQ(testutil::run_cli("analyze " + reflection_corpus() + " --output-dir " +
                                dir.string()),
              0);
    EXPECT_EQ(testutil::read_file(dir / "dataset_mean_rtc.csv"),
              "dataset,n,mean_rtc\ndefault,20,2.300000000\n");
    EXPECT_EQ(testutil::read_file(dir / "correctness_split.csv"),
              "group,n,mean_rtc,mean_len\n"
              "correct,0,,\n"
              "incorrect,20,2.300000000,64.000000000\n");
    EXPECT_EQ(testutil::read_file(dir / "accuracy_by_rtc_bin.csv"),
              "bin_start,bin_end,n,accuracy\n0,20,20,0.000000000\n");
    EXPECT_EQ(testutil::read_file(dir / "rtc_histogram.csv"),
              "rtc,count\n0,3\n1,3\n2,5\n3,5\n4,2\n5,2\n");
}

TEST(CliAnalyzeTest, BinWidthIsConfigurable) {
    const auto dir = testutil::make_temp_dir("bins");
    ASSERT_EQ(testutil::run_cli("analyze " + reflection_corpus() + " --output-dir " +
                                dir.string() + " --bin-width 2"),
              0);
    EXPECT_EQ(testutil::read_file(dir / "accuracy_by_rtc_bin.csv"),
              "bin_start,bin_end,n,accuracy\n"
              "0,2,6,0.000000000\n"
              "2,4,10,0.000000000\n"
              "4,6,4,0.000000000\n");
    EXPECT_EQ(testutil::run_cli("analyze " + reflection_corpus() + " --bin-width 0"), 4);
}

std::string small_sim_config(const fs::path& dir) {
    const json cfg = {
        {"sim",
         {{"archetypes",
           json::array({{{"name", "quick"}, {"p_correct", 0.9}, {"len_mean", 200.0},
                         {"len_std", 30.0}, {"rtc_mean", 5.0}, {"rtc_std", 2.0}},
                        {{"name", "slow"}, {"p_correct", 0.9}, {"len_mean", 900.0},
                         {"len_std", 100.0}, {"rtc_mean", 60.0}, {"rtc_std", 10.0}}})},
          {"m", 8},
          {"steps", 60},
          {"seed", 7},
          {"reward_mode", "arlcp"}}}};
    const auto path = dir / "sim_config.json";
    testutil::write_file(path, cfg.dump(2));
    return path.string();
}

TEST(CliTrainSimTest, DeterministicTraceBytes) {
    const auto dir = testutil::make_temp_dir("train");
    const std::string config = small_sim_config(dir);
    const auto out_a = dir / "a";
    const auto out_b = dir / "b";
    ASSERT_EQ(testutil::run_cli("train-sim --config " + config + " --output-dir " +
                                out_a.string()),
              0);
    ASSERT_EQ(testutil::run_cli("train-sim --config " + config + " --output-dir " +
                                out_b.string()),
              0);
    const std::string trace_a = testutil::read_file(out_a / "training_trace.csv");
    EXPECT_FALSE(trace_a.empty());
    EXPECT_EQ(trace_a, testutil::read_file(out_b / "training_trace.csv"));

    const json summary = json::parse(testutil::read_file(out_a / "train_summary.json"));
    EXPECT_TRUE(summary.contains("converged"));
    EXPECT_TRUE(summary.contains("top_archetype"));
    EXPECT_TRUE(summary.contains("oracle_argmax"));
    const std::string policy_csv = testutil::read_file(out_a / "final_policy.csv");
    EXPECT_NE(policy_csv.find("archetype,probability,oracle_expected_reward,"
                              "oracle_standard_error\n"),
              std::string::npos);
    EXPECT_NE(policy_csv.find("quick,"), std::string::npos);
    EXPECT_NE(policy_csv.find("slow,"), std::string::npos);
}

TEST(CliTrainSimTest, SeedOverrideChangesTrace) {
    const auto dir = testutil::make_temp_dir("seed");
    const std::string config = small_sim_config(dir);
    const auto out_a = dir / "a";
    const auto out_b = dir / "b";
    ASSERT_EQ(testutil::run_cli("train-sim --config " + config + " --output-dir " +
                                out_a.string()),
              0);
    ASSERT_EQ(testutil::run_cli("train-sim --config " + config + " --output-dir " +
                                out_b.string() + " --seed 99"),
              0);
    EXPECT_NE(testutil::read_file(out_a / "training_trace.csv"),
              testutil::read_file(out_b / "training_trace.csv"));
}

TEST(CliTrainSimTest, MissingSimConfigExitsFour) {
    EXPECT_EQ(testutil::run_cli("train-sim"), 4);
}

TEST(CliEvalTest, ReportsAndBaselineDeltas) {
    const auto dir = testutil::make_temp_dir("eval");
    const auto corpus = dir / "eval.jsonl";
    std::ostringstream lines;
    const auto record = [](const std::string& dataset, const std::string& prompt,
                           const std::string& rollout, const std::string& answer,
                           const std::string& truth, int tokens) {
        return "{\"prompt_id\":\"" + prompt + "\",\"rollout_id\":\"" + rollout +
               "\",\"text\":\"thinking</think>answer " + answer + "\",\"ground_truth\":\"" +
               truth + "\",\"token_count\":" + std::to_string(tokens) + ",\"dataset\":\"" +
               dataset + "\"}\n";
    };
    lines << record("d1", "c1", "s1", "5", "5", 400);
    lines << record("d1", "c1", "s2", "7", "5", 600);
    lines << record("d1", "c2", "s1", "3", "3", 500);
    lines << record("d1", "c2", "s2", "3", "3", 500);
    lines << record("d2", "c1", "s1", "1", "1", 300);
    testutil::write_file(corpus, lines.str());

    const auto base_dir = dir / "base";
    ASSERT_EQ(testutil::run_cli("eval " + corpus.string() + " --output-dir " +
                                base_dir.string()),
              0);
    const json report = json::parse(testutil::read_file(base_dir / "eval_report.json"));
    EXPECT_NEAR(report.at("per_dataset").at("d1").at("pass1_accuracy").get<double>(), 0.75,
                1e-12);
    EXPECT_NEAR(report.at("per_dataset").at("d1").at("mean_length").get<double>(), 500.0,
                1e-12);
    EXPECT_NEAR(report.at("per_dataset").at("d2").at("pass1_accuracy").get<double>(), 1.0,
                1e-12);
    EXPECT_FALSE(report.contains("delta_acc"));

    const auto delta_dir = dir / "delta";
    ASSERT_EQ(testutil::run_cli("eval " + corpus.string() + " --output-dir " +
                                delta_dir.string() + " --baseline " +
                                (base_dir / "eval_report.json").string()),
              0);
    const json delta_report = json::parse(testutil::read_file(delta_dir / "eval_report.json"));
    EXPECT_NEAR(delta_report.at("delta_acc").get<double>(), 0.0, 1e-12);
    EXPECT_NEAR(delta_report.at("delta_length_pct").get<double>(), 0.0, 1e-12);

    const auto missing = dir / "missing.json";
    testutil::write_file(missing,
                         "{\"per_dataset\": {\"d1\": {\"pass1_accuracy\": 0.5, "
                         "\"mean_length\": 100.0}}}");
    EXPECT_EQ(testutil::run_cli("eval " + corpus.string() + " --output-dir " +
                                (dir / "m").string() + " --baseline " + missing.string()),
              2);
}

}  // namespace
