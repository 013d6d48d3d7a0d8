#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <unistd.h>

#include "doctest.h"
#include "geore/drivers.hpp"
#include "geore/training.hpp"

using namespace geore;
using namespace geore::training;
namespace fs = std::filesystem;

TEST_CASE("binary cross entropy") {
  SUBCASE("perfect separation drives the loss to zero") {
    const double l = bce_loss<double>({1.0 - 1e-13}, {1e-13});
    CHECK(l < 1e-9);
  }
  SUBCASE("coin-flip probabilities give 2 ln 2 per sample") {
    CHECK(bce_loss<double>({0.5}, {0.5}) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("clamping keeps the loss finite at the edges") {
    CHECK(std::isfinite(bce_loss<double>({0.0}, {1.0})));
  }
  SUBCASE("gradient through scores matches finite differences") {
    auto loss = [](const Vec& p) {
      return bce_from_scores<double>({p[0], p[1]}, {p[2]}, 0.1);
    };
    const Vec at = {0.4, -1.1, 0.7};
    const Vec fd = finite_diff_grad(loss, at);
    ad::Tape tape;
    auto pv = tape.leaves(at);
    ad::Var out = bce_from_scores<ad::Var>({pv[0], pv[1]}, {pv[2]}, 0.1);
    const Vec adj = tape.gradient(out);
    for (int i = 0; i < 3; ++i)
      CHECK(std::fabs(adj[i] - fd[i]) / std::max(1.0, std::fabs(fd[i])) < 1e-4);
  }
  SUBCASE("empty positives are rejected") {
    CHECK_THROWS_AS(bce_loss<double>({}, {0.5}), Error);
  }
}

TEST_CASE("nested-fact loss terms") {
  // all-zero scores cost ln 2 per term
  const double l = softplus_rank_loss<double>({0.0, 0.0}, {0.0});
  CHECK(l == doctest::Approx(3.0 * std::log(2.0)).epsilon(1e-12));

  // hand-summed oracle on a small instance
  const Vec pos = {1.2, -0.4}, neg = {0.3};
  double manual = 0.0;
  for (double s : pos) manual += std::log1p(std::exp(-s));
  for (double s : neg) manual += std::log1p(std::exp(s));
  CHECK(softplus_rank_loss<double>({pos[0], pos[1]}, {neg[0]}) ==
        doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    Vec p = {1.0, -2.0};
    AdamState st;
    adam_step(p, {0.0, 0.0}, st, 0.1);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -2.0);
  }
  SUBCASE("constant gradient converges to lr * sign(g) steps") {
    Vec p = {0.0};
    AdamState st;
    double prev = 0.0;
    for (int i = 0; i < 2000; ++i) {
      prev = p[0];
      adam_step(p, {3.0}, st, 0.01);
    }
    CHECK(std::fabs((prev - p[0]) - 0.01) < 1e-5);
  }
  SUBCASE("quadratic bowl converges") {
    Vec p = {3.0, -4.0};
    AdamState st;
    for (int i = 0; i < 2000; ++i) adam_step(p, {2.0 * p[0], 2.0 * p[1]}, st, 1e-2);
    CHECK(std::fabs(p[0]) < 1e-6);
    CHECK(std::fabs(p[1]) < 1e-6);
  }
  SUBCASE("shape mismatch is an error") {
    Vec p = {0.0};
    AdamState st;
    CHECK_THROWS_AS(adam_step(p, {1.0, 2.0}, st, 0.1), Error);
  }
}

namespace {

drivers::UltraEDriver toy_driver() {
  std::vector<models::IdTriple> facts = {{0, 0, 1}, {1, 0, 2}, {2, 0, 3}, {3, 0, 0},
                                         {0, 1, 2}, {1, 1, 3}, {2, 1, 0}, {3, 1, 1},
                                         {0, 0, 2}, {1, 0, 3}};
  return drivers::UltraEDriver(models::UltraEModel(4, 2, 4, 2), std::move(facts), 2);
}

TrainConfig toy_config(int epochs) {
  TrainConfig cfg;
  cfg.model = "ultrae";
  cfg.dim = 6;
  cfg.epochs = epochs;
  cfg.batch = 4;
  cfg.negatives = 2;
  cfg.lr = 5e-3;
  cfg.seed = 7;
  cfg.patience = 50;
  cfg.self_check = false;
  return cfg;
}

}  // namespace

TEST_CASE("train loop") {
  SUBCASE("zero epochs produce the initial state only") {
    const auto drv = toy_driver();
    const TrainResult res = train(drv, toy_config(0));
    CHECK(res.train_curve.size() == 1);
    CHECK(res.best_epoch == 0);
    CHECK(res.params.size() == drv.num_params());
  }

  SUBCASE("identical seeds give identical loss curves and parameters") {
    const auto drv = toy_driver();
    const TrainResult a = train(drv, toy_config(5));
    const TrainResult b = train(drv, toy_config(5));
    REQUIRE(a.train_curve.size() == b.train_curve.size());
    for (std::size_t i = 0; i < a.train_curve.size(); ++i)
      CHECK(a.train_curve[i] == b.train_curve[i]);
    CHECK(a.params == b.params);

    TrainConfig other = toy_config(5);
    other.seed = 8;
    const TrainResult c = train(drv, other);
    CHECK(a.train_curve.back() != c.train_curve.back());
  }

  SUBCASE("the startup self-test accepts a correct model") {
    const auto drv = toy_driver();
    TrainConfig cfg = toy_config(1);
    cfg.self_check = true;
    CHECK_NOTHROW(train(drv, cfg));
  }

  SUBCASE("training reduces the loss on a learnable toy graph") {
    const auto drv = toy_driver();
    const TrainResult res = train(drv, toy_config(60));
    CHECK(res.train_curve.back() < res.train_curve.front());
  }
}

TEST_CASE("checkpoints round trip bit-exactly") {
  const fs::path dir =
      fs::temp_directory_path() / ("geore_ck_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string path = (dir / "ck.json").string();

  Checkpoint ck;
  ck.model = "ultrae";
  ck.hyper = {{"dim", 6}, {"seed", 7}};
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec params(257);
  for (double& p : params) p = u(rng) * std::pow(10.0, static_cast<int>(u(rng) * 30));
  params[0] = 0.1 + 0.2;  // classic non-representable sum
  ck.groups = {{"a", 0, 100}, {"b", 100, 157}};
  ck.params = params;
  save_checkpoint(path, ck);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.model == ck.model);
  CHECK(back.params == ck.params);  // bit-exact
  REQUIRE(back.groups.size() == 2);
  CHECK(back.groups[1].name == "b");
  CHECK(back.groups[1].size == 157);

  // identical saves produce identical bytes
  const std::string path2 = (dir / "ck2.json").string();
  save_checkpoint(path2, ck);
  std::ifstream f1(path), f2(path2);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  fs::remove_all(dir);
}

TEST_CASE("loss curve format") {
  const fs::path dir =
      fs::temp_directory_path() / ("geore_csv_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string path = (dir / "loss.csv").string();
  write_loss_curve(path, {1.5, 1.0}, {1.6, 1.1});
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "epoch,loss,val_loss");
  std::string row;
  std::getline(in, row);
  CHECK(row.substr(0, 2) == "0,");
  fs::remove_all(dir);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.smoothing = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  CHECK_NOTHROW(cfg.validate());
}
