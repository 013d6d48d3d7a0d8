// geore: train / eval / verify / export entry point.
//
// Exit codes: 0 success, 1 verification failure, 2 invalid flags,
// 3 data errors, 4 non-finite loss, 5 checkpoint problems.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "geore/data.hpp"
#include "geore/drivers.hpp"
#include "geore/eval.hpp"
#include "geore/models.hpp"
#include "geore/training.hpp"
#include "geore/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace geore;

namespace {

constexpr int kExitVerify = 1;
constexpr int kExitFlags = 2;
constexpr int kExitData = 3;
constexpr int kExitLoss = 4;
constexpr int kExitCheckpoint = 5;

std::string fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "missing";
  std::uint64_t h = 1469598103934665603ull;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  char out[32];
  std::snprintf(out, sizeof(out), "fnv64:%016llx", static_cast<unsigned long long>(h));
  return out;
}

class Manifest {
 public:
  Manifest(const fs::path& out_dir, const std::string& command) : path_(out_dir / "manifest.json") {
    j_["command"] = command;
    j_["status"] = "pending";
    start_ = std::chrono::steady_clock::now();
  }
  json& config() { return j_["config"]; }
  void input(const std::string& name, const std::string& file) {
    j_["inputs"][name] = {{"path", file}, {"hash", fnv1a_file(file)}};
  }
  void write() const {
    std::ofstream out(path_);
    out << j_.dump(2) << '\n';
  }
  void finalize(const std::string& status) {
    const auto dt = std::chrono::steady_clock::now() - start_;
    j_["timings"]["seconds"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(dt).count() / 1000.0;
    j_["status"] = status;
    write();
  }

 private:
  fs::path path_;
  json j_;
  std::chrono::steady_clock::time_point start_;
};

// Flat key=value config files; command-line flags override file entries.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::map<std::string, std::string> out;
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error("config line missing '=': " + line);
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

struct TrainFlags {
  std::string model, data, nested_data, out, config_file;
  training::TrainConfig cfg;
  bool no_selfcheck = false;
};

void apply_config_file(TrainFlags& f, CLI::App* cmd) {
  if (f.config_file.empty()) return;
  const auto kv = read_config_file(f.config_file);
  auto get = [&](const char* key, auto& slot, const char* flag) {
    auto it = kv.find(key);
    if (it == kv.end() || cmd->count(flag) > 0) return;
    std::istringstream is(it->second);
    is >> slot;
  };
  get("dim", f.cfg.dim, "--dim");
  get("lr", f.cfg.lr, "--lr");
  get("lr_decay", f.cfg.lr_decay, "--lr-decay");
  get("grad_clip", f.cfg.grad_clip, "--grad-clip");
  get("epochs", f.cfg.epochs, "--epochs");
  get("batch", f.cfg.batch, "--batch");
  get("neg", f.cfg.negatives, "--neg");
  get("seed", f.cfg.seed, "--seed");
  get("smoothing", f.cfg.smoothing, "--smoothing");
  get("lambda1", f.cfg.lambda1, "--lambda1");
  get("lambda", f.cfg.lambda, "--lambda");
  get("temperature", f.cfg.temperature, "--temperature");
  get("eps", f.cfg.eps, "--eps");
  get("phi", f.cfg.phi, "--phi");
  get("margin", f.cfg.margin, "--margin");
  get("time_dims", f.cfg.time_dims, "--time-dims");
  get("kind", f.cfg.algebra, "--kind");
  get("patience", f.cfg.patience, "--patience");
  get("val_fraction", f.cfg.val_fraction, "--val-fraction");
}

json config_snapshot(const training::TrainConfig& c, const std::string& model) {
  return json{{"model", model},
              {"dim", c.dim},
              {"lr", c.lr},
              {"lr_decay", c.lr_decay},
              {"grad_clip", c.grad_clip},
              {"epochs", c.epochs},
              {"batch", c.batch},
              {"neg", c.negatives},
              {"seed", c.seed},
              {"smoothing", c.smoothing},
              {"lambda1", c.lambda1},
              {"lambda", c.lambda},
              {"temperature", c.temperature},
              {"eps", c.eps},
              {"phi", c.phi},
              {"margin", c.margin},
              {"time_dims", c.time_dims},
              {"kind", std::string(1, c.algebra)},
              {"patience", c.patience},
              {"val_fraction", c.val_fraction},
              {"self_check", c.self_check}};
}

hypercomplex::Algebra algebra_of(char k) {
  switch (k) {
    case 'q': return hypercomplex::Algebra::Quaternion;
    case 'h': return hypercomplex::Algebra::Hyperbolic;
    case 's': return hypercomplex::Algebra::Split;
  }
  throw Error("unknown algebra kind (use q|h|s)");
}

// ---------------------------------------------------------------------------

template <class Driver>
int run_training(const Driver& drv, const TrainFlags& f, Manifest& manifest, json vocab_json,
                 const std::vector<models::ParamGroup>& groups) {
  const fs::path out_dir(f.out);
  training::TrainResult res;
  try {
    res = training::train(drv, f.cfg);
  } catch (const training::TrainAbort& e) {
    std::cerr << "error: " << e.what() << "\n";
    manifest.finalize("error");
    return kExitLoss;
  }
  training::Checkpoint ck;
  ck.model = f.model;
  ck.hyper = config_snapshot(f.cfg, f.model);
  ck.hyper["vocab"] = std::move(vocab_json);
  ck.hyper["best_epoch"] = res.best_epoch;
  ck.groups = groups;
  ck.params = res.params;
  training::save_checkpoint((out_dir / "checkpoint.json").string(), ck);
  training::write_loss_curve((out_dir / "loss.csv").string(), res.train_curve, res.val_curve);
  manifest.finalize("ok");
  std::cout << "trained " << f.model << ": " << res.train_curve.size() - 1 << " epochs, best val "
            << res.best_val << " at epoch " << res.best_epoch << "\n";
  return 0;
}

json vocab_to_json(const data::Vocab& v) {
  return json{{"entities", v.entity_names},
              {"relations", v.relation_names},
              {"nested_relations", v.nested_relation_names},
              {"concepts", v.concept_names},
              {"roles", v.role_names},
              {"individuals", v.individual_names}};
}

data::Vocab vocab_from_json(const json& j) {
  data::Vocab v;
  for (const auto& s : j.at("entities")) v.ent(s.get<std::string>());
  for (const auto& s : j.at("relations")) v.rel(s.get<std::string>());
  for (const auto& s : j.at("nested_relations")) v.nrel(s.get<std::string>());
  for (const auto& s : j.at("concepts")) v.con(s.get<std::string>());
  for (const auto& s : j.at("roles")) v.rol(s.get<std::string>());
  for (const auto& s : j.at("individuals")) v.ind(s.get<std::string>());
  return v;
}

// Published per-model defaults; explicit flags and config-file entries both
// win over these.
void apply_model_defaults(TrainFlags& f, const CLI::App* cmd) {
  if (f.model == "ultrae" && cmd->count("--neg") == 0) f.cfg.negatives = 50;
  if (f.model == "shrinke") {
    if (cmd->count("--smoothing") == 0) f.cfg.smoothing = 0.1;
    if (cmd->count("--lr") == 0) f.cfg.lr = 1e-4;
  }
}

int cmd_train(const TrainFlags& flags_in) {
  TrainFlags f = flags_in;
  f.cfg.self_check = !f.no_selfcheck;
  f.cfg.validate();
  const fs::path out_dir(f.out);
  fs::create_directories(out_dir);
  Manifest manifest(out_dir, "train");
  manifest.config() = config_snapshot(f.cfg, f.model);
  manifest.input("data", f.data);
  if (!f.nested_data.empty()) manifest.input("nested", f.nested_data);
  manifest.write();

  try {
    if (f.model == "ultrae") {
      auto triples = data::parse_triples(f.data);
      data::Vocab vocab = data::build_vocab(triples);
      std::vector<models::IdTriple> facts;
      for (const auto& t : triples)
        facts.push_back({vocab.entity.at(t.h), vocab.relation.at(t.r), vocab.entity.at(t.t)});
      int q = f.cfg.time_dims, p = f.cfg.dim - q;
      models::UltraEModel model(static_cast<int>(vocab.entity_names.size()),
                                static_cast<int>(vocab.relation_names.size()), p, q,
                                f.cfg.margin);
      drivers::UltraEDriver drv(model, std::move(facts), f.cfg.negatives, f.cfg.smoothing);
      return run_training(drv, f, manifest, vocab_to_json(vocab), model.param_groups());
    }
    if (f.model == "shrinke") {
      auto facts_raw = data::add_reciprocals_hyper(data::parse_hyper(f.data));
      data::Vocab vocab;
      for (const auto& hf : facts_raw) {
        vocab.ent(hf.primal.h);
        vocab.rel(hf.primal.r);
        vocab.ent(hf.primal.t);
        for (const auto& qv : hf.qualifiers) {
          vocab.rel(qv.k);
          vocab.ent(qv.v);
        }
      }
      std::vector<models::HyperIdFact> facts;
      for (const auto& hf : facts_raw) {
        models::HyperIdFact g;
        g.primal = {vocab.entity.at(hf.primal.h), vocab.relation.at(hf.primal.r),
                    vocab.entity.at(hf.primal.t)};
        for (const auto& qv : hf.qualifiers)
          g.qualifiers.emplace_back(vocab.relation.at(qv.k), vocab.entity.at(qv.v));
        facts.push_back(std::move(g));
      }
      models::ShrinkEModel model(static_cast<int>(vocab.entity_names.size()),
                                 static_cast<int>(vocab.relation_names.size()), f.cfg.dim,
                                 f.cfg.temperature);
      drivers::ShrinkEDriver drv(model, std::move(facts), f.cfg.negatives, f.cfg.smoothing);
      return run_training(drv, f, manifest, vocab_to_json(vocab), model.param_groups());
    }
    if (f.model == "neste") {
      auto triples = data::parse_triples(f.data);
      std::vector<data::NestedTriple> nested_raw;
      if (!f.nested_data.empty()) nested_raw = data::parse_nested(f.nested_data);
      data::Vocab vocab = data::build_vocab(triples);
      for (const auto& n : nested_raw) {
        for (const auto& t : {n.head, n.tail}) {
          vocab.ent(t.h);
          vocab.rel(t.r);
          vocab.ent(t.t);
        }
        vocab.nrel(n.rel);
      }
      std::vector<models::IdTriple> atomic;
      for (const auto& t : triples)
        atomic.push_back({vocab.entity.at(t.h), vocab.relation.at(t.r), vocab.entity.at(t.t)});
      std::vector<models::NestedIdFact> nested;
      for (const auto& n : nested_raw) {
        models::NestedIdFact g;
        g.head = {vocab.entity.at(n.head.h), vocab.relation.at(n.head.r),
                  vocab.entity.at(n.head.t)};
        g.nrel = vocab.nested_relation.at(n.rel);
        g.tail = {vocab.entity.at(n.tail.h), vocab.relation.at(n.tail.r),
                  vocab.entity.at(n.tail.t)};
        nested.push_back(g);
      }
      models::NestEModel model(static_cast<int>(vocab.entity_names.size()),
                               static_cast<int>(vocab.relation_names.size()),
                               std::max<int>(1, static_cast<int>(vocab.nested_relation_names.size())),
                               f.cfg.dim, algebra_of(f.cfg.algebra), f.cfg.lambda1);
      drivers::NestEDriver drv(model, std::move(atomic), std::move(nested), f.cfg.negatives);
      return run_training(drv, f, manifest, vocab_to_json(vocab), model.param_groups());
    }
    if (f.model == "boxel") {
      auto axioms = data::parse_el_jsonl(f.data);
      models::BoxELData resolved = models::resolve_el(axioms);
      json vocab_json = vocab_to_json(resolved.vocab);
      models::BoxELModel model(static_cast<int>(resolved.vocab.concept_names.size()),
                               std::max<int>(1, static_cast<int>(resolved.vocab.individual_names.size())),
                               std::max<int>(1, static_cast<int>(resolved.vocab.role_names.size())),
                               f.cfg.dim);
      model.eps = f.cfg.eps;
      model.temp = f.cfg.temperature;
      drivers::BoxELDriver drv(model, std::move(resolved), f.cfg.phi);
      return run_training(drv, f, manifest, std::move(vocab_json), model.param_groups());
    }
    if (f.model == "hmi") {
      poincare::HexGraph hex = data::parse_hex(f.data);
      models::HmiModel model(static_cast<int>(hex.labels.size()), f.cfg.dim);
      drivers::HmiDriver drv(model, hex);
      json vj = vocab_to_json(data::Vocab{});
      vj["labels"] = hex.labels;
      return run_training(drv, f, manifest, std::move(vj), model.param_groups());
    }
    std::cerr << "error: unknown model '" << f.model << "'\n";
    manifest.finalize("error");
    return kExitFlags;
  } catch (const data::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    manifest.finalize("error");
    return kExitData;
  } catch (const training::TrainAbort& e) {
    std::cerr << "error: " << e.what() << "\n";
    manifest.finalize("error");
    return kExitLoss;
  }
}

// ---------------------------------------------------------------------------
// eval

struct EvalFlags {
  std::string checkpoint, data_file, out;
  std::vector<std::string> filters;
};

using PairKey = std::pair<int, int>;

int cmd_eval(const EvalFlags& f) {
  fs::create_directories(f.out);
  Manifest manifest(fs::path(f.out), "eval");
  manifest.input("checkpoint", f.checkpoint);
  manifest.input("data", f.data_file);
  for (std::size_t i = 0; i < f.filters.size(); ++i)
    manifest.input("filter" + std::to_string(i), f.filters[i]);
  manifest.write();

  training::Checkpoint ck;
  try {
    ck = training::load_checkpoint(f.checkpoint);
  } catch (const std::exception& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    manifest.finalize("error");
    return kExitCheckpoint;
  }

  std::map<std::string, double> metrics;
  std::vector<std::pair<std::string, eval::RankingSummary>> per_relation;
  try {
    data::Vocab vocab = vocab_from_json(ck.hyper.at("vocab"));
    if (ck.model == "ultrae" || ck.model == "neste") {
      auto tests = data::parse_triples(f.data_file);
      std::map<PairKey, std::set<int>> known_tails, known_heads;
      auto absorb = [&](const std::vector<data::Triple>& ts) {
        for (const auto& t : ts) {
          auto he = vocab.entity.find(t.h);
          auto re = vocab.relation.find(t.r);
          auto te = vocab.entity.find(t.t);
          if (he == vocab.entity.end() || re == vocab.relation.end() || te == vocab.entity.end())
            continue;
          known_tails[{he->second, re->second}].insert(te->second);
          known_heads[{re->second, te->second}].insert(he->second);
        }
      };
      for (const auto& file : f.filters) absorb(data::parse_triples(file));
      absorb(tests);

      std::vector<models::IdTriple> queries;
      int skipped = 0;
      for (const auto& t : tests) {
        auto he = vocab.entity.find(t.h);
        auto re = vocab.relation.find(t.r);
        auto te = vocab.entity.find(t.t);
        if (he == vocab.entity.end() || re == vocab.relation.end() || te == vocab.entity.end()) {
          ++skipped;
          continue;
        }
        queries.push_back({he->second, re->second, te->second});
      }
      const int n_ent = static_cast<int>(vocab.entity_names.size());
      const int n_rel = static_cast<int>(vocab.relation_names.size());
      std::vector<int> ranks_f(queries.size() * 2), ranks_r(queries.size() * 2);

      auto rank_query = [&](const Vec& scores, int true_id, const std::set<int>& known,
                            std::size_t slot) {
        std::set<int> filt = known;
        ranks_f[slot] = eval::filtered_rank(scores, true_id, filt);
        ranks_r[slot] = eval::raw_rank(scores, true_id);
      };

      if (ck.model == "ultrae") {
        const int q = ck.hyper.at("time_dims").get<int>();
        const int dim = ck.hyper.at("dim").get<int>();
        models::UltraEModel model(n_ent, n_rel, dim - q, q, ck.hyper.at("margin").get<double>());
        if (model.num_params() != ck.params.size())
          throw Error("checkpoint/model parameter-count mismatch");
        eval::parallel_for(queries.size(), [&](std::size_t i) {
          const auto& t = queries[i];
          rank_query(drivers::ultrae_score_tails(model, ck.params, t.h, t.r), t.t,
                     known_tails[{t.h, t.r}], 2 * i);
          rank_query(drivers::ultrae_score_heads(model, ck.params, t.r, t.t), t.h,
                     known_heads[{t.r, t.t}], 2 * i + 1);
        });
      } else {
        const int dim = ck.hyper.at("dim").get<int>();
        const int n_nrel = std::max<int>(1, static_cast<int>(vocab.nested_relation_names.size()));
        models::NestEModel model(n_ent, n_rel, n_nrel, dim,
                                 algebra_of(ck.hyper.at("kind").get<std::string>()[0]),
                                 ck.hyper.at("lambda1").get<double>());
        if (model.num_params() != ck.params.size())
          throw Error("checkpoint/model parameter-count mismatch");
        eval::parallel_for(queries.size(), [&](std::size_t i) {
          const auto& t = queries[i];
          rank_query(drivers::neste_score_tails(model, ck.params, t.h, t.r), t.t,
                     known_tails[{t.h, t.r}], 2 * i);
          Vec heads(static_cast<std::size_t>(model.n_ent));
          for (int h = 0; h < model.n_ent; ++h) heads[h] = model.atomic_score(ck.params, h, t.r, t.t);
          rank_query(heads, t.h, known_heads[{t.r, t.t}], 2 * i + 1);
        });
      }
      const auto sf = eval::summarize(ranks_f);
      const auto sr = eval::summarize(ranks_r);
      metrics = {{"mrr", sf.mrr},         {"mr", sf.mr},           {"hits@1", sf.hits1},
                 {"hits@3", sf.hits3},    {"hits@10", sf.hits10},  {"raw_mrr", sr.mrr},
                 {"raw_mr", sr.mr},       {"raw_hits@10", sr.hits10},
                 {"queries", static_cast<double>(sf.n)},
                 {"skipped_unknown", static_cast<double>(skipped)}};
      std::map<int, std::vector<int>> by_rel;
      for (std::size_t i = 0; i < queries.size(); ++i) {
        by_rel[queries[i].r].push_back(ranks_f[2 * i]);
        by_rel[queries[i].r].push_back(ranks_f[2 * i + 1]);
      }
      for (const auto& [r, ranks] : by_rel)
        per_relation.emplace_back(vocab.relation_names[static_cast<std::size_t>(r)],
                                  eval::summarize(ranks));
    } else if (ck.model == "shrinke") {
      auto tests = data::parse_hyper(f.data_file);
      const int dim = ck.hyper.at("dim").get<int>();
      models::ShrinkEModel model(static_cast<int>(vocab.entity_names.size()),
                                 static_cast<int>(vocab.relation_names.size()), dim,
                                 ck.hyper.at("temperature").get<double>());
      if (model.num_params() != ck.params.size())
        throw Error("checkpoint/model parameter-count mismatch");
      auto key_of = [](const models::HyperIdFact& g) {
        std::ostringstream os;
        os << g.primal.h << '|' << g.primal.r;
        auto qs = g.qualifiers;
        std::sort(qs.begin(), qs.end());
        for (const auto& [k, v] : qs) os << '|' << k << ':' << v;
        return os.str();
      };
      std::vector<models::HyperIdFact> queries;
      int skipped = 0;
      std::map<std::string, std::set<int>> known;
      auto to_ids = [&](const data::HyperFact& hf, models::HyperIdFact& g) {
        auto he = vocab.entity.find(hf.primal.h);
        auto re = vocab.relation.find(hf.primal.r);
        auto te = vocab.entity.find(hf.primal.t);
        if (he == vocab.entity.end() || re == vocab.relation.end() || te == vocab.entity.end())
          return false;
        g.primal = {he->second, re->second, te->second};
        for (const auto& qv : hf.qualifiers) {
          auto ke = vocab.relation.find(qv.k);
          auto ve = vocab.entity.find(qv.v);
          if (ke == vocab.relation.end() || ve == vocab.entity.end()) return false;
          g.qualifiers.emplace_back(ke->second, ve->second);
        }
        return true;
      };
      for (const auto& file : f.filters)
        for (const auto& hf : data::parse_hyper(file)) {
          models::HyperIdFact g;
          if (to_ids(hf, g)) known[key_of(g)].insert(g.primal.t);
        }
      for (const auto& hf : tests) {
        models::HyperIdFact g;
        if (to_ids(hf, g)) {
          known[key_of(g)].insert(g.primal.t);
          queries.push_back(std::move(g));
        } else {
          ++skipped;
        }
      }
      std::vector<int> ranks_f(queries.size()), ranks_r(queries.size());
      eval::parallel_for(queries.size(), [&](std::size_t i) {
        const Vec scores = drivers::shrinke_score_tails(model, ck.params, queries[i]);
        ranks_f[i] = eval::filtered_rank(scores, queries[i].primal.t, known[key_of(queries[i])]);
        ranks_r[i] = eval::raw_rank(scores, queries[i].primal.t);
      });
      const auto sf = eval::summarize(ranks_f);
      const auto sr = eval::summarize(ranks_r);
      metrics = {{"mrr", sf.mrr},          {"mr", sf.mr},
                 {"hits@1", sf.hits1},     {"hits@3", sf.hits3},
                 {"hits@10", sf.hits10},   {"raw_mrr", sr.mrr},
                 {"raw_mr", sr.mr},        {"queries", static_cast<double>(sf.n)},
                 {"skipped_unknown", static_cast<double>(skipped)}};
      std::map<int, std::vector<int>> by_rel;
      for (std::size_t i = 0; i < queries.size(); ++i)
        by_rel[queries[i].primal.r].push_back(ranks_f[i]);
      for (const auto& [r, ranks] : by_rel)
        per_relation.emplace_back(vocab.relation_names[static_cast<std::size_t>(r)],
                                  eval::summarize(ranks));
    } else if (ck.model == "boxel") {
      auto tests = data::parse_el_jsonl(f.data_file);
      const int dim = ck.hyper.at("dim").get<int>();
      models::BoxELModel model(static_cast<int>(vocab.concept_names.size()),
                               std::max<int>(1, static_cast<int>(vocab.individual_names.size())),
                               std::max<int>(1, static_cast<int>(vocab.role_names.size())), dim);
      model.eps = ck.hyper.at("eps").get<double>();
      model.temp = ck.hyper.at("temperature").get<double>();
      if (model.num_params() != ck.params.size())
        throw Error("checkpoint/model parameter-count mismatch");
      std::vector<std::pair<int, int>> pairs;
      for (const auto& ax : tests) {
        if (ax.form != data::ElForm::NF1) continue;
        auto ce = vocab.concepts.find(ax.c);
        auto de = vocab.concepts.find(ax.d);
        if (ce == vocab.concepts.end() || de == vocab.concepts.end()) continue;
        pairs.emplace_back(ce->second, de->second);
      }
      if (pairs.empty()) throw Error("no usable nf1 test axioms");
      std::map<int, std::set<int>> known;
      for (const auto& [c, d] : pairs) known[c].insert(d);
      for (const auto& file : f.filters)
        for (const auto& ax : data::parse_el_jsonl(file)) {
          if (ax.form != data::ElForm::NF1) continue;
          auto ce = vocab.concepts.find(ax.c);
          auto de = vocab.concepts.find(ax.d);
          if (ce != vocab.concepts.end() && de != vocab.concepts.end())
            known[ce->second].insert(de->second);
        }
      std::vector<int> ranks_f(pairs.size()), ranks_r(pairs.size());
      std::vector<std::pair<boxes::Box, boxes::Box>> box_pairs;
      Vec pos_scores, neg_scores;
      std::mt19937_64 rng = rng_stream(ck.hyper.at("seed").get<std::uint64_t>(), "eval-neg");
      std::uniform_int_distribution<int> pick(0, model.n_con - 1);
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [c, d] = pairs[i];
        Vec scores(static_cast<std::size_t>(model.n_con));
        for (int cand = 0; cand < model.n_con; ++cand)
          scores[static_cast<std::size_t>(cand)] = model.subsumption_score(
              ck.params, models::ConceptRef{false, c}, models::ConceptRef{false, cand});
        ranks_f[i] = eval::filtered_rank(scores, d, known[c]);
        ranks_r[i] = eval::raw_rank(scores, d);
        box_pairs.emplace_back(model.box_of(ck.params, models::ConceptRef{false, c}),
                               model.box_of(ck.params, models::ConceptRef{false, d}));
        pos_scores.push_back(scores[static_cast<std::size_t>(d)]);
        int nd = pick(rng);
        while (nd == d) nd = pick(rng);
        neg_scores.push_back(scores[static_cast<std::size_t>(nd)]);
      }
      const auto sf = eval::summarize(ranks_f);
      const auto sr = eval::summarize(ranks_r);
      metrics = {{"mrr", sf.mrr},
                 {"mr", sf.mr},
                 {"hits@10", sf.hits10},
                 {"raw_mr", sr.mr},
                 {"auc", eval::auc(pos_scores, neg_scores)},
                 {"containment_accuracy", eval::containment_accuracy(box_pairs)},
                 {"queries", static_cast<double>(sf.n)}};
    } else if (ck.model == "hmi") {
      poincare::HexGraph hex = data::parse_hex(f.data_file);
      const int dim = ck.hyper.at("dim").get<int>();
      models::HmiModel model(static_cast<int>(hex.labels.size()), dim);
      if (model.num_params() != ck.params.size())
        throw Error("checkpoint/model parameter-count mismatch");
      const Vec losses = model.raw_constraint_losses(ck.params, hex);
      double total = 0.0, worst = 0.0;
      for (double l : losses) {
        total += l;
        worst = std::max(worst, l);
      }
      auto balls = model.balls(ck.params);
      std::mt19937_64 rng = rng_stream(ck.hyper.at("seed").get<std::uint64_t>(), "eval-grid");
      std::uniform_real_distribution<double> u(-0.95, 0.95);
      std::vector<Vec> scores;
      std::vector<std::vector<bool>> preds;
      for (int i = 0; i < 1000; ++i) {
        Vec p(static_cast<std::size_t>(dim));
        do {
          for (double& x : p) x = u(rng);
        } while (norm2(p) >= 0.95);
        Vec row(hex.labels.size());
        std::vector<bool> pr(hex.labels.size());
        for (std::size_t l = 0; l < hex.labels.size(); ++l) {
          row[l] = poincare::membership_score(p, balls[l]);
          pr[l] = row[l] >= 0.5;
        }
        scores.push_back(std::move(row));
        preds.push_back(std::move(pr));
      }
      metrics = {{"constraint_loss_total", total},
                 {"constraint_loss_max", worst},
                 {"hcv", poincare::hcv(scores, hex.hier)},
                 {"ecv", poincare::ecv(preds, hex.excl)}};
    } else {
      throw Error("unknown model tag in checkpoint: " + ck.model);
    }
  } catch (const data::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    manifest.finalize("error");
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    manifest.finalize("error");
    return kExitCheckpoint;
  }

  metrics["tie_policy_pessimistic"] = 1.0;  // worst rank under ties
  eval::write_metrics_json((fs::path(f.out) / "metrics.json").string(), metrics);
  eval::write_per_relation_csv((fs::path(f.out) / "per_relation.csv").string(), per_relation);
  manifest.finalize("ok");
  for (const auto& [k, v] : metrics) std::cout << k << " = " << v << "\n";
  return 0;
}

int cmd_verify(const std::string& suite, bool inject_failure) {
  std::vector<verify::CheckResult> results;
  try {
    results = verify::run_suites(suite, inject_failure);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFlags;
  }
  std::size_t failed = 0;
  for (const auto& r : results) {
    std::printf("%-38s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.detail.c_str());
    if (!r.pass) ++failed;
  }
  std::printf("%zu checks, %zu failed\n", results.size(), failed);
  return failed == 0 ? 0 : kExitVerify;
}

int cmd_export(const std::string& checkpoint, const std::string& out) {
  training::Checkpoint ck;
  try {
    ck = training::load_checkpoint(checkpoint);
  } catch (const std::exception& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return kExitCheckpoint;
  }
  fs::create_directories(out);
  Manifest manifest(fs::path(out), "export");
  manifest.input("checkpoint", checkpoint);
  for (const auto& g : ck.groups) {
    std::ofstream f(fs::path(out) / (g.name + ".csv"));
    f << "index,value\n";
    char buf[64];
    for (std::size_t i = 0; i < g.size; ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, ck.params[g.offset + i]);
      f << buf;
    }
  }
  manifest.finalize("ok");
  std::cout << "exported " << ck.groups.size() << " parameter groups\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geometric relational embedding toolkit"};
  app.require_subcommand(1);

  TrainFlags tf;
  CLI::App* train = app.add_subcommand("train", "train a model");
  train->add_option("--model", tf.model, "ultrae|shrinke|neste|boxel|hmi")->required();
  train->add_option("--data", tf.data, "input data file")->required();
  train->add_option("--out", tf.out, "output directory")->required();
  train->add_option("--nested", tf.nested_data, "nested facts file (neste)");
  train->add_option("--config", tf.config_file, "key=value config file");
  train->add_option("--dim", tf.cfg.dim);
  train->add_option("--lr", tf.cfg.lr);
  train->add_option("--lr-decay", tf.cfg.lr_decay);
  train->add_option("--grad-clip", tf.cfg.grad_clip);
  train->add_option("--epochs", tf.cfg.epochs);
  train->add_option("--batch", tf.cfg.batch);
  train->add_option("--neg", tf.cfg.negatives);
  train->add_option("--seed", tf.cfg.seed);
  train->add_option("--smoothing", tf.cfg.smoothing);
  train->add_option("--lambda1", tf.cfg.lambda1);
  train->add_option("--lambda", tf.cfg.lambda);
  train->add_option("--temperature", tf.cfg.temperature);
  train->add_option("--eps", tf.cfg.eps);
  train->add_option("--phi", tf.cfg.phi);
  train->add_option("--margin", tf.cfg.margin);
  train->add_option("--time-dims", tf.cfg.time_dims);
  train->add_option("--kind", tf.cfg.algebra, "algebra kind q|h|s");
  train->add_option("--patience", tf.cfg.patience);
  train->add_option("--val-fraction", tf.cfg.val_fraction);
  train->add_flag("--no-selfcheck", tf.no_selfcheck, "skip the startup gradient self-test");

  EvalFlags ef;
  CLI::App* ev = app.add_subcommand("eval", "evaluate a checkpoint");
  ev->add_option("--checkpoint", ef.checkpoint)->required();
  ev->add_option("--data", ef.data_file, "test file")->required();
  ev->add_option("--out", ef.out)->required();
  ev->add_option("--filter", ef.filters, "known-true files for filtered ranking");

  std::string suite = "all";
  bool inject = false;
  CLI::App* vf = app.add_subcommand("verify", "run the property suites");
  vf->add_option("--suite", suite, "patterns|soundness|gradients|geometry|all");
  vf->add_flag("--inject-failure", inject, "append a failing check (wiring test)");

  std::string ex_ck, ex_out;
  CLI::App* ex = app.add_subcommand("export", "dump checkpoint parameter groups as CSV");
  ex->add_option("--checkpoint", ex_ck)->required();
  ex->add_option("--out", ex_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitFlags;
  }

  try {
    if (train->parsed()) {
      apply_model_defaults(tf, train);
      apply_config_file(tf, train);
      return cmd_train(tf);
    }
    if (ev->parsed()) return cmd_eval(ef);
    if (vf->parsed()) return cmd_verify(suite, inject);
    if (ex->parsed()) return cmd_export(ex_ck, ex_out);
  } catch (const data::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitFlags;
}
