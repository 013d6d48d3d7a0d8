#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "doctest.h"
#include "geore/numerics.hpp"

// End-to-end checks of the command-line surface: flags, exit codes, artifact
// layout and byte-level determinism. GEORE_CLI_PATH is injected by the build.

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("geore_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(GEORE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_family_kb(const std::string& path) {
  std::ofstream out(path);
  out << R"({"form":"nf1","c":"Male","d":"Person"}
{"form":"nf1","c":"Female","d":"Person"}
{"form":"nf1","c":"Father","d":"Male"}
{"form":"nf1","c":"Mother","d":"Female"}
{"form":"nf1","c":"Father","d":"Parent"}
{"form":"nf1","c":"Mother","d":"Parent"}
{"form":"nf1","c":"Parent","d":"Person"}
{"form":"nf2_bot","c":"Female","c2":"Male"}
{"form":"nf2","c":"Female","c2":"Parent","d":"Mother"}
{"form":"nf2","c":"Male","c2":"Parent","d":"Father"}
{"form":"nf4","r":"hasChild","c":"Person","d":"Parent"}
{"form":"nf3","c":"Parent","r":"hasChild","d":"Person"}
{"form":"concept_assertion","c":"Father","a":"Alex"}
{"form":"concept_assertion","c":"Father","a":"Bob"}
{"form":"concept_assertion","c":"Mother","a":"Marie"}
{"form":"concept_assertion","c":"Mother","a":"Alice"}
)";
}

void write_symmetric_kg(const std::string& path) {
  std::ofstream out(path);
  out << "a\tr\tb\nb\tr\ta\nc\tr\td\nd\tr\tc\na\tr\tc\nc\tr\ta\n";
}

}  // namespace

TEST_CASE("invalid flags exit with code 2") {
  CHECK(run("train --data /dev/null --out /tmp/geore_nowhere") == 2);  // missing --model
  CHECK(run("bogus-subcommand") == 2);
  CHECK(run("") == 2);
}

TEST_CASE("data errors exit with code 3") {
  TempDir tmp;
  std::ofstream bad(tmp.sub("bad.tsv"));
  bad << "only-one-field\n";
  bad.close();
  CHECK(run("train --model ultrae --data " + tmp.sub("bad.tsv") + " --out " + tmp.sub("out")) ==
        3);
}

TEST_CASE("missing checkpoint exits with code 5") {
  TempDir tmp;
  write_symmetric_kg(tmp.sub("kg.tsv"));
  CHECK(run("eval --checkpoint " + tmp.sub("nope.json") + " --data " + tmp.sub("kg.tsv") +
            " --out " + tmp.sub("out")) == 5);
}

TEST_CASE("non-finite loss exits with code 4") {
  TempDir tmp;
  write_symmetric_kg(tmp.sub("kg.tsv"));
  CHECK(run("train --model neste --data " + tmp.sub("kg.tsv") + " --out " + tmp.sub("out") +
            " --dim 2 --epochs 3 --lr 1e160 --neg 1 --no-selfcheck") == 4);
}

TEST_CASE("ontology training produces the expected artifacts deterministically") {
  TempDir tmp;
  write_family_kb(tmp.sub("family.jsonl"));
  const std::string common = "train --model boxel --data " + tmp.sub("family.jsonl") +
                             " --dim 2 --epochs 40 --lr 5e-3 --seed 7 --no-selfcheck --out ";
  REQUIRE(run(common + tmp.sub("run1")) == 0);
  CHECK(fs::exists(tmp.sub("run1") + "/checkpoint.json"));
  CHECK(fs::exists(tmp.sub("run1") + "/loss.csv"));
  CHECK(fs::exists(tmp.sub("run1") + "/manifest.json"));
  CHECK(slurp(tmp.sub("run1") + "/manifest.json").find("\"status\": \"ok\"") != std::string::npos);

  REQUIRE(run(common + tmp.sub("run2")) == 0);
  CHECK(slurp(tmp.sub("run1") + "/checkpoint.json") ==
        slurp(tmp.sub("run2") + "/checkpoint.json"));
  CHECK(slurp(tmp.sub("run1") + "/loss.csv") == slurp(tmp.sub("run2") + "/loss.csv"));

  // a different seed changes the checkpoint
  REQUIRE(run("train --model boxel --data " + tmp.sub("family.jsonl") +
              " --dim 2 --epochs 40 --lr 5e-3 --seed 8 --no-selfcheck --out " +
              tmp.sub("run3")) == 0);
  CHECK(slurp(tmp.sub("run1") + "/checkpoint.json") !=
        slurp(tmp.sub("run3") + "/checkpoint.json"));
}

TEST_CASE("config file values apply unless overridden by flags") {
  TempDir tmp;
  write_family_kb(tmp.sub("family.jsonl"));
  std::ofstream cfg(tmp.sub("run.cfg"));
  cfg << "epochs=40\nlr=5e-3\nseed=7\ndim=2\n";
  cfg.close();
  REQUIRE(run("train --model boxel --data " + tmp.sub("family.jsonl") + " --config " +
              tmp.sub("run.cfg") + " --no-selfcheck --out " + tmp.sub("cfged")) == 0);
  // matches the flag-specified run bit for bit
  REQUIRE(run("train --model boxel --data " + tmp.sub("family.jsonl") +
              " --dim 2 --epochs 40 --lr 5e-3 --seed 7 --no-selfcheck --out " +
              tmp.sub("flags")) == 0);
  CHECK(slurp(tmp.sub("cfged") + "/checkpoint.json") ==
        slurp(tmp.sub("flags") + "/checkpoint.json"));
}

TEST_CASE("train then eval on a learnable toy graph") {
  TempDir tmp;
  write_symmetric_kg(tmp.sub("kg.tsv"));
  REQUIRE(run("train --model ultrae --data " + tmp.sub("kg.tsv") +
              " --dim 4 --time-dims 2 --epochs 250 --lr 1e-2 --neg 2 --batch 6 --seed 5"
              " --val-fraction 0 --patience 0 --no-selfcheck --out " +
              tmp.sub("model")) == 0);
  REQUIRE(run("eval --checkpoint " + tmp.sub("model") + "/checkpoint.json --data " +
              tmp.sub("kg.tsv") + " --filter " + tmp.sub("kg.tsv") + " --out " +
              tmp.sub("eval")) == 0);
  CHECK(fs::exists(tmp.sub("eval") + "/metrics.json"));
  CHECK(fs::exists(tmp.sub("eval") + "/per_relation.csv"));
  const std::string manifest = slurp(tmp.sub("eval") + "/manifest.json");
  CHECK(manifest.find("filter0") != std::string::npos);

  // metric files are byte-identical across repeated runs and thread counts
  REQUIRE(run("eval --checkpoint " + tmp.sub("model") + "/checkpoint.json --data " +
              tmp.sub("kg.tsv") + " --filter " + tmp.sub("kg.tsv") + " --out " +
              tmp.sub("eval2")) == 0);
  {
    const std::string cmd = std::string("GEORE_THREADS=4 ") + GEORE_CLI_PATH +
                            " eval --checkpoint " + tmp.sub("model") +
                            "/checkpoint.json --data " + tmp.sub("kg.tsv") + " --filter " +
                            tmp.sub("kg.tsv") + " --out " + tmp.sub("eval4") +
                            " > /dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(slurp(tmp.sub("eval4") + "/metrics.json") == slurp(tmp.sub("eval") + "/metrics.json"));
  }
  CHECK(slurp(tmp.sub("eval") + "/metrics.json") == slurp(tmp.sub("eval2") + "/metrics.json"));
  CHECK(slurp(tmp.sub("eval") + "/per_relation.csv") ==
        slurp(tmp.sub("eval2") + "/per_relation.csv"));

  // converged model ranks the training tails near the top
  const std::string metrics = slurp(tmp.sub("eval") + "/metrics.json");
  const auto pos = metrics.find("\"mrr\": ");
  REQUIRE(pos != std::string::npos);
  const double mrr = std::atof(metrics.c_str() + pos + 7);
  CHECK(mrr >= 0.8);
}

TEST_CASE("every model family trains and evaluates through the CLI") {
  TempDir tmp;

  {  // hyper-relational facts
    std::ofstream f(tmp.sub("hyper.tsv"));
    f << "e1\tworks\te2\tsince\te3\n"
      << "e2\tworks\te1\n"
      << "e3\tknows\te4\trole\te1\tlevel\te2\n"
      << "e4\tknows\te3\n";
  }
  REQUIRE(run("train --model shrinke --data " + tmp.sub("hyper.tsv") +
              " --dim 4 --epochs 5 --neg 2 --batch 4 --no-selfcheck --out " +
              tmp.sub("sh")) == 0);
  REQUIRE(run("eval --checkpoint " + tmp.sub("sh") + "/checkpoint.json --data " +
              tmp.sub("hyper.tsv") + " --out " + tmp.sub("sh_eval")) == 0);
  CHECK(slurp(tmp.sub("sh_eval") + "/metrics.json").find("mrr") != std::string::npos);

  {  // atomic plus nested facts
    std::ofstream f(tmp.sub("atomic.tsv"));
    f << "a\tr1\tb\nb\tr1\tc\nc\tr2\ta\nb\tr2\td\n";
    std::ofstream g(tmp.sub("nested.tsv"));
    g << "a,r1,b\timplies\tb,r1,c\n"
      << "c,r2,a\timplies\tb,r2,d\n";
  }
  REQUIRE(run("train --model neste --data " + tmp.sub("atomic.tsv") + " --nested " +
              tmp.sub("nested.tsv") +
              " --dim 2 --kind s --epochs 5 --neg 2 --batch 4 --no-selfcheck --out " +
              tmp.sub("ne")) == 0);
  REQUIRE(run("eval --checkpoint " + tmp.sub("ne") + "/checkpoint.json --data " +
              tmp.sub("atomic.tsv") + " --out " + tmp.sub("ne_eval")) == 0);
  CHECK(slurp(tmp.sub("ne_eval") + "/metrics.json").find("mrr") != std::string::npos);

  write_family_kb(tmp.sub("family.jsonl"));
  REQUIRE(run("train --model boxel --data " + tmp.sub("family.jsonl") +
              " --dim 2 --epochs 10 --no-selfcheck --out " + tmp.sub("bx")) == 0);
  REQUIRE(run("eval --checkpoint " + tmp.sub("bx") + "/checkpoint.json --data " +
              tmp.sub("family.jsonl") + " --out " + tmp.sub("bx_eval")) == 0);
  CHECK(slurp(tmp.sub("bx_eval") + "/metrics.json").find("containment_accuracy") !=
        std::string::npos);

  {  // hierarchy/exclusion graph
    std::ofstream f(tmp.sub("graph.hex"));
    f << "h\tchild\tparent\nh\tparent\troot\ne\tchild\tother\nh\tother\troot\n";
  }
  REQUIRE(run("train --model hmi --data " + tmp.sub("graph.hex") +
              " --dim 2 --epochs 300 --lr 1e-2 --no-selfcheck --out " + tmp.sub("hm")) == 0);
  REQUIRE(run("eval --checkpoint " + tmp.sub("hm") + "/checkpoint.json --data " +
              tmp.sub("graph.hex") + " --out " + tmp.sub("hm_eval")) == 0);
  const std::string hm = slurp(tmp.sub("hm_eval") + "/metrics.json");
  CHECK(hm.find("hcv") != std::string::npos);
  CHECK(hm.find("constraint_loss_total") != std::string::npos);
}

TEST_CASE("export dumps parameter groups") {
  TempDir tmp;
  write_family_kb(tmp.sub("family.jsonl"));
  REQUIRE(run("train --model boxel --data " + tmp.sub("family.jsonl") +
              " --dim 2 --epochs 5 --no-selfcheck --out " + tmp.sub("model")) == 0);
  REQUIRE(run("export --checkpoint " + tmp.sub("model") + "/checkpoint.json --out " +
              tmp.sub("exported")) == 0);
  CHECK(fs::exists(tmp.sub("exported") + "/concept_corners.csv"));
  CHECK(fs::exists(tmp.sub("exported") + "/individuals.csv"));
}

TEST_CASE("verify wiring") {
  CHECK(run("verify --suite geometry") == 0);
  CHECK(run("verify --suite geometry --inject-failure") == 1);
  CHECK(run("verify --suite nonsense") == 2);
}
