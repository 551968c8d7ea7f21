#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "deepridge/commands.hpp"
#include "test_support.hpp"

using namespace deepridge;
using namespace deepridge::testing;

namespace {

class Commands : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("deepridge_cmd_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::ostringstream out, err;
  std::filesystem::path dir_;
};

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find(": ");
    if (pos != std::string::npos) m[line.substr(0, pos)] = line.substr(pos + 2);
  }
  return m;
}

}  // namespace

TEST_F(Commands, NormsOfZeroModelAreZero) {
  save_model(DeepNet{{BottleneckLayer::zeros(2, 3, 2), BottleneckLayer::zeros(3, 1, 4)}}, path("zero.json"));
  ASSERT_EQ(cmd_norms(path("zero.json"), out, err), kExitOk);
  const auto table = parse_kv(out.str());
  EXPECT_EQ(table.at("dims"), "2,3,1");
  int numeric = 0;
  for (const auto& [key, value] : table) {
    if (key == "dims" || key == "widths") continue;
    EXPECT_EQ(std::stod(value), 0.0) << key;
    ++numeric;
  }
  EXPECT_GE(numeric, 18);
  EXPECT_TRUE(table.count("classic_path_norm"));
}

TEST_F(Commands, NormsMatchLibrary) {
  std::mt19937_64 rng(80);
  const DeepNet net = random_net(rng, {{2, 1}, {5}});
  save_model(net, path("m.json"));
  ASSERT_EQ(cmd_norms(path("m.json"), out, err), kExitOk);
  const auto table = parse_kv(out.str());
  EXPECT_EQ(std::stod(table.at("rtv2")), rtv2_shallow(net.layers[0]));
  EXPECT_EQ(std::stod(table.at("lipschitz_bound")), lipschitz_bound(net));
  EXPECT_EQ(std::stod(table.at("weight_decay_with_boundary")),
            regularizer_core(net, RegularizerKind::weight_decay_with_boundary));
  EXPECT_FALSE(table.count("classic_path_norm"));
}

TEST_F(Commands, BalanceWritesEquivalentModel) {
  std::mt19937_64 rng(81);
  const DeepNet net = random_net(rng, {{3, 2, 1}, {4, 3}});
  save_model(net, path("in.json"));
  ASSERT_EQ(cmd_balance(path("in.json"), path("out.json"), out, err), kExitOk);
  const DeepNet bal = load_model(path("out.json"));
  const Vector x{0.3, -1.2, 0.7};
  EXPECT_NEAR(forward(bal, x)[0], forward(net, x)[0], 1e-9);
  const auto table = parse_kv(out.str());
  EXPECT_NEAR(std::stod(table.at("sum_of_squares_after")), std::stod(table.at("sum_of_path")), 1e-12 * 10);
}

TEST_F(Commands, CollapseRejectsBiases) {
  std::mt19937_64 rng(82);
  save_model(random_net(rng, {{2, 2, 1}, {3, 2}}), path("biased.json"));
  EXPECT_EQ(cmd_collapse(path("biased.json"), path("out.json"), out, err), kExitValidation);
  EXPECT_NE(err.str().find("layer"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(path("out.json")));
}

TEST_F(Commands, CollapseWritesStandardNet) {
  std::mt19937_64 rng(83);
  const DeepNet net = random_net(rng, {{3, 2, 1}, {4, 3}}, {.biases = false, .skips = false});
  save_model(net, path("in.json"));
  ASSERT_EQ(cmd_collapse(path("in.json"), path("std.json"), out, err), kExitOk);
  const StandardNet s = parse_standard(detail::read_file(path("std.json")));
  EXPECT_EQ(s, collapse_to_standard(net));
  const auto table = parse_kv(out.str());
  EXPECT_EQ(table.at("A1.shape"), "3x4");
  EXPECT_EQ(table.at("A1.rank_bound"), "2");
}

TEST_F(Commands, EvalPrintsRowsAndLoss) {
  auto line = BottleneckLayer::zeros(1, 1, 0);
  line.C = Matrix{{2}};
  line.c0 = {1};
  save_model(DeepNet{{line}}, path("line.json"));
  ASSERT_EQ(cmd_eval(path("line.json"), DEEPRIDGE_DATA_DIR "/collinear_2pt.csv", out, err), kExitOk);
  EXPECT_EQ(out.str(), "row,f1\n1,-1\n2,5\n\nloss: 0\n");
  EXPECT_EQ(cmd_eval(path("line.json"), DEEPRIDGE_DATA_DIR "/missing.csv", out, err), kExitValidation);
}

TEST_F(Commands, TrainWritesModelAndTrace) {
  const TrainCommand cmd{DEEPRIDGE_DATA_DIR "/collinear_2pt.csv", DEEPRIDGE_DATA_DIR "/smoke_config.json",
                         path("m.json"), path("trace.csv"), std::nullopt};
  ASSERT_EQ(cmd_train(cmd, out, err), kExitOk);
  const auto table = parse_kv(out.str());
  EXPECT_LT(std::stod(table.at("final_data_loss")), 1e-3);
  const DeepNet net = load_model(path("m.json"));
  EXPECT_EQ(net.in_dim(), 1u);
  const std::string trace = detail::read_file(path("trace.csv"));
  EXPECT_EQ(trace.rfind("epoch,objective\n0,", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(trace.begin(), trace.end(), '\n')),
            load_config(cmd.config_path).epochs + 2);

  std::ostringstream out2;
  ASSERT_EQ(cmd_train({cmd.data_path, cmd.config_path, path("m2.json"), "", std::uint64_t{7}}, out2, err), kExitOk);
  EXPECT_NE(detail::read_file(path("m.json")), detail::read_file(path("m2.json")));
}

TEST_F(Commands, SweepTable) {
  EXPECT_EQ(parse_lambda_list("0, 1e-3,0.5"), (std::vector<double>{0, 1e-3, 0.5}));
  EXPECT_THROW(parse_lambda_list(""), ValidationError);
  EXPECT_THROW(parse_lambda_list("1,x"), ValidationError);

  nlohmann::json cfg = nlohmann::json::parse(detail::read_file(DEEPRIDGE_DATA_DIR "/smoke_config.json"));
  cfg["epochs"] = 100;
  detail::write_file(path("cfg.json"), cfg.dump());
  const SweepCommand cmd{DEEPRIDGE_DATA_DIR "/collinear_2pt.csv", path("cfg.json"), "0,0.01", std::nullopt};
  ASSERT_EQ(cmd_sweep(cmd, out, err), kExitOk);
  std::ostringstream again;
  ASSERT_EQ(cmd_sweep(cmd, again, err), kExitOk);
  EXPECT_EQ(out.str(), again.str());
  std::istringstream lines(out.str());
  std::string header, row;
  std::getline(lines, header);
  EXPECT_EQ(header, "lambda,final_data_loss,final_regularizer,path_core,weight_decay_core,active_total,active_per_layer");
  int rows = 0;
  while (std::getline(lines, row)) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST_F(Commands, RadonVerifyPassesOnShallowNet) {
  std::mt19937_64 rng(84);
  save_model(random_net(rng, {{3, 1}, {10}}), path("s.json"));
  EXPECT_EQ(cmd_radon_verify({path("s.json"), 200, 0, 1e-9}, out, err), kExitOk);
  EXPECT_EQ(parse_kv(out.str()).at("result"), "pass");
  // Zero tolerance cannot be met by a strict inequality.
  std::ostringstream out2;
  EXPECT_EQ(cmd_radon_verify({path("s.json"), 20, 0, 0.0}, out2, err), kExitVerification);
  save_model(random_net(rng, {{3, 2}, {4}}), path("v.json"));
  EXPECT_EQ(cmd_radon_verify({path("v.json"), 20, 0, 1e-9}, out, err), kExitValidation);
}

TEST_F(Commands, LipschitzBoundHolds) {
  std::mt19937_64 rng(85);
  save_model(random_net(rng, {{2, 3, 1}, {5, 4}}), path("m.json"));
  EXPECT_EQ(cmd_lipschitz({path("m.json"), 2000, 0, 1.0}, out, err), kExitOk);
  const auto table = parse_kv(out.str());
  EXPECT_LE(std::stod(table.at("empirical_lipschitz")), std::stod(table.at("lipschitz_bound")));
  EXPECT_EQ(table.at("bound_holds"), "true");
}
