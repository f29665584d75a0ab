// Copyright 2026 The gnnaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// gnnaudit: command-line front end.
//
// Exit codes: 0 success, 1 configuration or input error, 2 partial failure
// (some `run` cells failed; completed cells are still reported).
// GNNAUDIT_WORKERS sets the worker-pool width of `run`; nothing else is
// read from the environment.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "gnnaudit/analysis.hpp"
#include "gnnaudit/attack.hpp"
#include "gnnaudit/exchangeability.hpp"
#include "gnnaudit/experiment.hpp"
#include "gnnaudit/graph_io.hpp"
#include "gnnaudit/model.hpp"
#include "gnnaudit/model_io.hpp"
#include "gnnaudit/sampling.hpp"

namespace ga = gnnaudit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

std::size_t WorkersFromEnv() {
  const char* v = std::getenv("GNNAUDIT_WORKERS");
  if (v == nullptr || *v == '\0') return 1;
  const auto n = ga::ParseInt<std::size_t>(v);
  if (n == 0) throw ga::InvalidArgument("GNNAUDIT_WORKERS must be >= 1");
  return n;
}

// Writes to `path`, or stdout for "-".
void Emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
  } else {
    ga::WriteFile(path, text);
  }
}

std::string HistogramCsv(const ga::Histogram& members, const ga::Histogram& nonmembers) {
  std::string out = "bin_lo,bin_hi,members,nonmembers\n";
  for (std::size_t b = 0; b < members.counts.size(); ++b) {
    out += ga::FormatDouble(members.edges[b]) + "," + ga::FormatDouble(members.edges[b + 1]) + "," +
           std::to_string(members.counts[b]) + "," + std::to_string(nonmembers.counts[b]) + "\n";
  }
  return out;
}

struct SampleArgs {
  std::string dataset, out;
  std::string strategy = "random";
  double fraction = 0.1;
  int k = 3, seeds_per_class = 10, num_splits = 5;
  std::uint64_t seed = 0;
};

int RunSample(const SampleArgs& a) {
  const ga::Graph g = ga::LoadGraph(a.dataset);
  ga::ExperimentConfig c;
  c.base_seed = a.seed;
  ga::SamplingParams p;
  p.train_fraction = a.fraction;
  p.k = a.k;
  p.seeds_per_class = a.seeds_per_class;
  const auto strategy = ga::ParseStrategy(a.strategy);
  ga::fs::create_directories(a.out);
  for (int i = 0; i < a.num_splits; ++i) {
    const auto split = ga::MakeSplit(g, strategy, p, ga::SplitSeed(c, strategy, a.fraction, i));
    const auto path = ga::fs::path(a.out) / ("split_" + std::to_string(i) + ".json");
    ga::WriteFile(path, ga::SerializeSplit(split));
    std::printf("%s train=%zu test=%zu train_edges=%zu\n", path.string().c_str(), split.train_nodes.size(),
                split.test_nodes.size(), split.train_edges.size());
  }
  return kExitOk;
}

struct TrainArgs {
  std::string dataset, split, out;
  std::string arch = "gcn";
  ga::ModelConfig model;
  ga::TrainConfig train;
};

int RunTrain(TrainArgs a) {
  const ga::Graph g = ga::LoadGraph(a.dataset);
  const ga::Split split = ga::ParseSplit(ga::ReadFile(a.split));
  ga::ValidateSplit(g, split);
  a.model.arch = ga::ParseArch(a.arch);
  const auto result = ga::Train(g, split, a.model, a.train);
  ga::SaveParams(result.params, a.out);
  std::printf("arch=%s final_loss=%s\n", a.arch.c_str(), ga::FormatDouble(result.final_loss).c_str());
  return kExitOk;
}

struct InferArgs {
  std::string model, dataset, split, out;
  std::string regime = "orig";
};

int RunInfer(const InferArgs& a) {
  const ga::Graph g = ga::LoadGraph(a.dataset);
  const ga::Split split = ga::ParseSplit(ga::ReadFile(a.split));
  ga::ValidateSplit(g, split);
  const auto params = ga::LoadParams(a.model);
  const auto table = ga::Infer(params, g, split, ga::ParseRegime(a.regime));
  Emit(a.out, ga::SerializePosteriors(table, split.TrainMask()));
  return kExitOk;
}

struct AttackArgs {
  std::string posteriors, out = "-";
  int trials = 3;
  bool balance = false;
  std::uint64_t seed = 0;
  ga::AttackConfig attack;
  // Row labels only; they do not change the computation.
  std::string dataset = "unknown", strategy = "random", arch = "gcn", regime = "orig";
  double fraction = 0.0;
  int split_id = 0;
};

int RunAttack(AttackArgs a) {
  const auto file = ga::ParsePosteriors(ga::ReadFile(a.posteriors));
  std::vector<ga::NodeId> members, nonmembers;
  for (std::size_t i = 0; i < file.node_ids.size(); ++i) (file.member[i] ? members : nonmembers).push_back(file.node_ids[i]);
  a.attack.balance = a.balance;
  ga::AuditRecord base;
  base.dataset = a.dataset;
  base.strategy = ga::ParseStrategy(a.strategy);
  base.fraction = a.fraction;
  base.split_id = a.split_id;
  base.arch = ga::ParseArch(a.arch);
  base.regime = ga::ParseRegime(a.regime);
  base.train_acc = file.table.Accuracy(members);
  base.test_acc = file.table.Accuracy(nonmembers);
  base.gap_percent = base.train_acc > 0.0 ? ga::PerformanceGap(base.train_acc, base.test_acc) : 0.0;
  std::string out = std::string(ga::kAuditColumns) + "\n";
  for (int trial = 0; trial < a.trials; ++trial) {
    ga::AuditRecord r = base;
    r.trial_id = trial;
    r.advantage =
        ga::RunAttackTrial(file.table, members, nonmembers, a.attack, ga::DeriveSeed(a.seed, "attack", trial))
            .report.advantage;
    out += ga::AuditRow(r) + "\n";
  }
  Emit(a.out, out);
  return kExitOk;
}

struct AnalyzeArgs {
  std::string model, dataset, split, posteriors, records, hist_out;
  std::string out = "-";
  std::string regime_a = "orig", regime_b = "all";
};

int RunAnalyzeKl(const AnalyzeArgs& a) {
  const ga::Graph g = ga::LoadGraph(a.dataset);
  const ga::Split split = ga::ParseSplit(ga::ReadFile(a.split));
  ga::ValidateSplit(g, split);
  const auto ra = ga::ParseRegime(a.regime_a), rb = ga::ParseRegime(a.regime_b);
  const auto profile = ga::RegimeKlProfile(ga::LoadParams(a.model), g, split, ra, rb);
  std::string out = "# meta kind=kl regime_a=" + a.regime_a + " regime_b=" + a.regime_b + " model=" + a.model +
                    " split=" + a.split + " bins=" + std::to_string(ga::kHistogramBins) + " log_base=e\n";
  out += "node_id,member,kl\n";
  for (const auto& r : profile.records) {
    out += std::to_string(r.node_id) + "," + (r.member ? "1" : "0") + "," + ga::FormatDouble(r.kl) + "\n";
  }
  Emit(a.out, out);
  if (!a.hist_out.empty()) ga::WriteFile(a.hist_out, HistogramCsv(profile.members, profile.nonmembers));
  return kExitOk;
}

int RunAnalyzeJs(const AnalyzeArgs& a) {
  const ga::Graph g = ga::LoadGraph(a.dataset);
  const auto file = ga::ParsePosteriors(ga::ReadFile(a.posteriors));
  if (file.table.size() != g.node_count()) throw ga::InvalidArgument("posteriors do not match the dataset");
  // Neighbors are taken in the original graph unless a split narrows them
  // to its train and test edges.
  ga::EdgeList edges = g.edges();
  if (!a.split.empty()) {
    const ga::Split split = ga::ParseSplit(ga::ReadFile(a.split));
    ga::ValidateSplit(g, split);
    edges = ga::ActiveEdges(g, split, ga::Regime::kOrig);
  }
  const auto profile = ga::NeighborJsProfileOf(file.table, edges);
  std::string out = "# meta kind=js posteriors=" + a.posteriors + " split=" + (a.split.empty() ? "-" : a.split) +
                    " log_base=e\n";
  out += "node_id,mean_js,ecdf\n";
  for (const auto& r : profile.records) {
    out += std::to_string(r.node_id) + "," + ga::FormatDouble(r.mean_js) + "," +
           ga::FormatDouble(profile.ecdf.At(r.mean_js)) + "\n";
  }
  Emit(a.out, out);
  return kExitOk;
}

int RunAnalyzeLogit(const AnalyzeArgs& a) {
  const auto file = ga::ParsePosteriors(ga::ReadFile(a.posteriors));
  const auto profile = ga::LogitProfileOf(file.table, file.member);
  std::string out = "# meta kind=logit posteriors=" + a.posteriors + " bins=" +
                    std::to_string(ga::kHistogramBins) + " separability=" + ga::FormatDouble(profile.separability) +
                    "\n";
  out += "node_id,member,logit\n";
  for (const auto& r : profile.records) {
    out += std::to_string(r.node_id) + "," + (r.member ? "1" : "0") + "," + ga::FormatDouble(r.logit) + "\n";
  }
  Emit(a.out, out);
  if (!a.hist_out.empty()) ga::WriteFile(a.hist_out, HistogramCsv(profile.members, profile.nonmembers));
  return kExitOk;
}

int RunAnalyzeGap(const AnalyzeArgs& a) {
  const auto records = ga::ParseRecordsCsv(ga::ReadFile(a.records));
  std::string out = "# meta kind=gap records=" + a.records + "\n";
  out += "dataset,strategy,fraction,split_id,arch,regime,train_acc,test_acc,gap_percent\n";
  for (const auto& r : records) {
    if (r.trial_id != 0) continue;  // accuracies repeat across attack trials
    out += r.dataset + "," + ga::ToString(r.strategy) + "," + ga::FormatDouble(r.fraction) + "," +
           std::to_string(r.split_id) + "," + ga::ToString(r.arch) + "," + ga::ToString(r.regime) + "," +
           ga::FormatDouble(r.train_acc) + "," + ga::FormatDouble(r.test_acc) + "," +
           ga::FormatDouble(ga::PerformanceGap(r.train_acc, r.test_acc)) + "\n";
  }
  Emit(a.out, out);
  return kExitOk;
}

struct ExchangeArgs {
  std::string dataset, split;
  std::string out = "-";
  int hops = 2, trials = 10000;
  std::uint64_t seed = 0;
  bool transductive = false;
};

int RunExchangeability(const ExchangeArgs& a) {
  const ga::Graph g = ga::LoadGraph(a.dataset);
  const ga::Split split = ga::ParseSplit(ga::ReadFile(a.split));
  ga::ValidateSplit(g, split);
  if (split.train_nodes.empty() || split.test_nodes.empty()) throw ga::InvalidArgument("split has an empty side");
  ga::Rng rng(a.seed);
  std::string out = "member,nonmember,compatible,num_witnesses,support_break\n";
  std::size_t violations = 0;
  for (int i = 0; i < a.trials; ++i) {
    const auto m = split.train_nodes[rng.UniformIndex(split.train_nodes.size())];
    const auto t = split.test_nodes[rng.UniformIndex(split.test_nodes.size())];
    const auto v = ga::CheckSplitSwap(g, split, m, t, a.hops, a.transductive);
    violations += !v.compatible;
    out += std::to_string(m) + "," + std::to_string(t) + "," + (v.compatible ? "1" : "0") + "," +
           std::to_string(v.witnesses.size()) + "," + (v.support_break ? "1" : "0") + "\n";
  }
  Emit(a.out, out);
  const auto e = ga::WilsonEstimate(violations, static_cast<std::size_t>(a.trials));
  std::fprintf(stderr, "violation_rate=%.4f wilson95=[%.4f, %.4f] trials=%d\n", e.rate, e.wilson_low,
               e.wilson_high, a.trials);
  return kExitOk;
}

int RunPipeline(const std::string& config_path, const std::string& out_dir) {
  const auto cfg = ga::ConfigFromJson(nlohmann::json::parse(ga::ReadFile(config_path)));
  const auto summary = ga::RunExperiment(cfg, out_dir, WorkersFromEnv());
  std::printf("records=%zu splits_generated=%zu models_trained=%zu posteriors_computed=%zu failures=%zu\n",
              summary.records.size(), summary.splits_generated, summary.models_trained,
              summary.posteriors_computed, summary.failures.size());
  for (const auto& f : summary.failures) std::fprintf(stderr, "failed cell %s: %s\n", f.cell.c_str(), f.error.c_str());
  return summary.failures.empty() ? kExitOk : kExitPartial;
}

int RunReport(const std::string& records_path, const std::string& out) {
  const auto records = ga::ParseRecordsCsv(ga::ReadFile(records_path));
  Emit(out, ga::RenderTables(records) +
                ga::RenderTrends(ga::EvaluateTrends(records, {ga::Arch::kGcn, ga::Arch::kGat})));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership-inference audits for graph neural networks"};
  app.require_subcommand(1);

  SampleArgs sample;
  auto* sub_sample = app.add_subcommand("sample", "Draw train/test splits");
  sub_sample->add_option("--dataset", sample.dataset, "Canonical dataset directory")->required();
  sub_sample->add_option("--strategy", sample.strategy, "random or snowball");
  sub_sample->add_option("--fraction", sample.fraction, "Train node fraction");
  sub_sample->add_option("--k", sample.k, "Snowball neighbors drawn per node");
  sub_sample->add_option("--seeds-per-class", sample.seeds_per_class, "Snowball seeds per class");
  sub_sample->add_option("--num-splits", sample.num_splits);
  sub_sample->add_option("--seed", sample.seed, "Base seed");
  sub_sample->add_option("--out", sample.out, "Output directory")->required();

  TrainArgs train;
  auto* sub_train = app.add_subcommand("train", "Train a GNN on the train subgraph of a split");
  sub_train->add_option("--dataset", train.dataset)->required();
  sub_train->add_option("--split", train.split)->required();
  sub_train->add_option("--arch", train.arch, "gcn, sage or gat");
  sub_train->add_option("--hidden", train.model.hidden_dim);
  sub_train->add_option("--heads", train.model.gat_heads);
  sub_train->add_option("--dropout", train.model.dropout);
  sub_train->add_option("--lr", train.train.learning_rate);
  sub_train->add_option("--weight-decay", train.train.weight_decay);
  sub_train->add_option("--epochs", train.train.epochs);
  sub_train->add_option("--seed", train.train.init_seed, "Initialization and dropout seed");
  sub_train->add_option("--out", train.out)->required();

  InferArgs infer;
  auto* sub_infer = app.add_subcommand("infer", "Write per-node posteriors under an edge-access regime");
  sub_infer->add_option("--model", infer.model)->required();
  sub_infer->add_option("--dataset", infer.dataset)->required();
  sub_infer->add_option("--split", infer.split)->required();
  sub_infer->add_option("--regime", infer.regime, "orig, all or none");
  sub_infer->add_option("--out", infer.out)->required();

  AttackArgs attack;
  auto* sub_attack = app.add_subcommand("attack", "Train attack models and measure membership advantage");
  sub_attack->add_option("--posteriors", attack.posteriors)->required();
  sub_attack->add_option("--trials", attack.trials);
  sub_attack->add_flag("--balance", attack.balance, "Downsample the larger pool");
  sub_attack->add_option("--seed", attack.seed);
  sub_attack->add_option("--epochs", attack.attack.epochs);
  sub_attack->add_option("--out", attack.out);
  sub_attack->add_option("--dataset-name", attack.dataset);
  sub_attack->add_option("--strategy", attack.strategy);
  sub_attack->add_option("--fraction", attack.fraction);
  sub_attack->add_option("--split-id", attack.split_id);
  sub_attack->add_option("--arch", attack.arch);
  sub_attack->add_option("--regime", attack.regime);

  AnalyzeArgs analyze;
  auto* sub_analyze = app.add_subcommand("analyze", "Divergence, logit and gap analyses");
  sub_analyze->require_subcommand(1);
  auto* an_kl = sub_analyze->add_subcommand("kl", "Per-node KL between two regimes");
  an_kl->add_option("--model", analyze.model)->required();
  an_kl->add_option("--dataset", analyze.dataset)->required();
  an_kl->add_option("--split", analyze.split)->required();
  an_kl->add_option("--regime-a", analyze.regime_a);
  an_kl->add_option("--regime-b", analyze.regime_b);
  an_kl->add_option("--hist-out", analyze.hist_out);
  an_kl->add_option("--out", analyze.out);
  auto* an_js = sub_analyze->add_subcommand("js", "Mean JS divergence to neighbors, with ECDF");
  an_js->add_option("--posteriors", analyze.posteriors)->required();
  an_js->add_option("--dataset", analyze.dataset)->required();
  an_js->add_option("--split", analyze.split);
  an_js->add_option("--out", analyze.out);
  auto* an_logit = sub_analyze->add_subcommand("logit", "Logit of the true-class posterior");
  an_logit->add_option("--posteriors", analyze.posteriors)->required();
  an_logit->add_option("--hist-out", analyze.hist_out);
  an_logit->add_option("--out", analyze.out);
  auto* an_gap = sub_analyze->add_subcommand("gap", "Performance gap per record");
  an_gap->add_option("--records", analyze.records)->required();
  an_gap->add_option("--out", analyze.out);

  ExchangeArgs exch;
  auto* sub_exch = app.add_subcommand("exchangeability", "Check member/non-member swaps");
  sub_exch->add_option("--dataset", exch.dataset)->required();
  sub_exch->add_option("--split", exch.split)->required();
  sub_exch->add_option("--L", exch.hops, "Neighborhood radius");
  sub_exch->add_option("--trials", exch.trials);
  sub_exch->add_option("--seed", exch.seed);
  sub_exch->add_flag("--transductive", exch.transductive, "Model sees the full graph during training");
  sub_exch->add_option("--out", exch.out);

  std::string config_path, run_out;
  auto* sub_run = app.add_subcommand("run", "Full pipeline from a JSON config");
  sub_run->add_option("--config", config_path)->required();
  sub_run->add_option("--out", run_out, "Report directory")->required();

  std::string report_records, report_out = "-";
  auto* sub_report = app.add_subcommand("report", "Render tables and trend flags from records.csv");
  sub_report->add_option("--records", report_records)->required();
  sub_report->add_option("--out", report_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sub_sample) return RunSample(sample);
    if (*sub_train) return RunTrain(train);
    if (*sub_infer) return RunInfer(infer);
    if (*sub_attack) return RunAttack(attack);
    if (*an_kl) return RunAnalyzeKl(analyze);
    if (*an_js) return RunAnalyzeJs(analyze);
    if (*an_logit) return RunAnalyzeLogit(analyze);
    if (*an_gap) return RunAnalyzeGap(analyze);
    if (*sub_exch) return RunExchangeability(exch);
    if (*sub_run) return RunPipeline(config_path, run_out);
    if (*sub_report) return RunReport(report_records, report_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gnnaudit: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
