// umgad: command-line driver for multiplex graph anomaly detection.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "umgad/umgad.hpp"

namespace fs = std::filesystem;
using namespace umgad;

namespace {

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> score_seed;
  std::optional<unsigned> threads;
};

void add_config_options(CLI::App* sub, ConfigArgs& a) {
  sub->add_option("--config", a.config_path, "INI config file");
  sub->add_option("--set", a.overrides, "override, e.g. --set train.epochs=50 (repeatable)");
  sub->add_option("--seed", a.seed, "training seed (train.seed)");
  sub->add_option("--score-seed", a.score_seed, "inference plan seed (detect.score_seed)");
  sub->add_option("--threads", a.threads, "worker cap for scoring (detect.threads)");
}

Config resolve(const ConfigArgs& a) {
  Config cfg = a.config_path.empty() ? Config{} : load_config(a.config_path);
  for (const auto& o : a.overrides) apply_override(cfg, o);
  if (a.seed) cfg.train.seed = *a.seed;
  if (a.score_seed) cfg.detect.score_seed = *a.score_seed;
  if (a.threads) cfg.detect.threads = *a.threads;
  cfg.validate();
  std::cout << "# resolved config\n" << to_string(cfg) << std::flush;
  return cfg;
}

MultiplexGraph load_graph(const std::string& manifest, bool standardize) {
  MultiplexGraph g = load_multiplex(manifest);
  if (standardize) standardize_features(g.attributes);
  return g;
}

AnomalyScores score_with(const MultiplexGraph& g, const Config& cfg, const std::string& ckpt) {
  const TrainState st = load_checkpoint(ckpt);
  return score_nodes(g, st.params, cfg.model, cfg.mask, cfg.rwr, cfg.loss, cfg.train.ablation, cfg.score_options());
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  auto out = open_out(path);
  body(out);
  if (!out) throw IoError("failed writing " + path);
}

std::vector<int> labels_for(const MultiplexGraph& g, const std::string& labels_path) {
  if (!labels_path.empty()) return read_labels(labels_path, g.node_count());
  if (g.labels) return *g.labels;
  return {};
}

void print_metrics(const std::vector<double>& fused, const std::vector<int>& flags, const std::vector<int>& labels) {
  const Metrics m = evaluate(fused, flags, labels);
  std::printf("auc=%.4f\nmacro_f1=%.4f\n", m.auc, m.macro_f1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unsupervised anomaly detection on multiplex graphs"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic community multiplex graph");
  SbmConfig sbm;
  std::uint64_t gen_seed = 0;
  std::string gen_out, gen_stem = "graph";
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--stem", gen_stem, "file name stem");
  gen->add_option("--seed", gen_seed);
  gen->add_option("--nodes", sbm.nodes);
  gen->add_option("--relations", sbm.relations);
  gen->add_option("--communities", sbm.communities);
  gen->add_option("--features", sbm.feature_dim);
  gen->add_option("--degree-in", sbm.avg_degree_in);
  gen->add_option("--degree-out", sbm.avg_degree_out);
  gen->add_option("--noise", sbm.noise);

  // inject
  auto* inj = app.add_subcommand("inject", "inject clique and attribute anomalies");
  InjectionConfig icfg;
  std::string inj_manifest, inj_out, inj_stem = "injected";
  std::uint64_t inj_seed = 0;
  inj->add_option("--manifest", inj_manifest)->required();
  inj->add_option("--out", inj_out, "output directory")->required();
  inj->add_option("--stem", inj_stem);
  inj->add_option("--seed", inj_seed);
  inj->add_option("--n-struct", icfg.n_struct, "number of cliques");
  inj->add_option("--clique-size", icfg.clique_size);
  inj->add_option("--n-attr", icfg.n_attr, "number of attribute anomalies");
  inj->add_option("--candidates", icfg.candidates);
  std::optional<std::size_t> inj_count;
  auto* count_opt = inj->add_option("--count", inj_count, "total anomalies, split half cliques / half attribute");
  count_opt->excludes("--n-struct")->excludes("--n-attr");

  // config
  auto* cfgcmd = app.add_subcommand("config", "print the resolved configuration");
  ConfigArgs cfg_args;
  add_config_options(cfgcmd, cfg_args);

  // train
  auto* tr = app.add_subcommand("train", "train a model and write a checkpoint");
  ConfigArgs tr_args;
  std::string tr_manifest, tr_out, tr_log, tr_dump;
  bool tr_std = false;
  add_config_options(tr, tr_args);
  tr->add_option("--manifest", tr_manifest)->required();
  tr->add_option("--out", tr_out, "checkpoint path")->required();
  tr->add_option("--log", tr_log, "per-epoch loss CSV");
  tr->add_option("--dump-plans", tr_dump, "write every mask/augment plan here");
  tr->add_flag("--standardize", tr_std, "z-score feature columns");

  // score
  auto* sc = app.add_subcommand("score", "write per-view and fused anomaly scores");
  ConfigArgs sc_args;
  std::string sc_manifest, sc_ckpt, sc_out;
  std::optional<std::size_t> sc_topk;
  bool sc_std = false;
  add_config_options(sc, sc_args);
  sc->add_option("--manifest", sc_manifest)->required();
  sc->add_option("--ckpt", sc_ckpt)->required();
  sc->add_option("--out", sc_out, "scores CSV")->required();
  sc->add_option("--top-k", sc_topk, "flag the k highest scores (default: no flags)");
  sc->add_flag("--standardize", sc_std);

  // detect
  auto* dt = app.add_subcommand("detect", "score, pick a threshold and flag anomalies");
  ConfigArgs dt_args;
  std::string dt_manifest, dt_ckpt, dt_out, dt_curve, dt_labels;
  std::optional<std::size_t> dt_topk;
  bool dt_std = false;
  add_config_options(dt, dt_args);
  dt->add_option("--manifest", dt_manifest)->required();
  dt->add_option("--ckpt", dt_ckpt)->required();
  dt->add_option("--out", dt_out, "scores CSV with flags")->required();
  dt->add_option("--curve", dt_curve, "ranked-score curve CSV");
  dt->add_option("--labels", dt_labels, "ground truth for metrics (defaults to manifest labels)");
  dt->add_option("--top-k", dt_topk, "flag the k highest scores instead of using the knee");
  dt->add_flag("--standardize", dt_std);

  // eval
  auto* ev = app.add_subcommand("eval", "AUC and macro-F1 of a scores file");
  std::string ev_scores, ev_labels;
  ev->add_option("--scores", ev_scores)->required();
  ev->add_option("--labels", ev_labels)->required();

  // curve
  auto* cv = app.add_subcommand("curve", "ranked-score curve and knee of a scores file");
  std::string cv_scores, cv_out;
  cv->add_option("--scores", cv_scores)->required();
  cv->add_option("--out", cv_out, "curve CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      const auto sg = make_sbm_multiplex(sbm, gen_seed);
      fs::create_directories(gen_out);
      std::cout << write_multiplex(sg.graph, gen_out, gen_stem).string() << '\n';
    } else if (*inj) {
      const MultiplexGraph g = load_multiplex(inj_manifest);
      if (inj_count) {
        const std::size_t candidates = icfg.candidates;
        icfg = split_injection(*inj_count, icfg.clique_size);
        icfg.candidates = candidates;
      }
      const auto res = inject_anomalies(g, icfg, RngStream(inj_seed, "cli"));
      std::printf("cliques=%zu attribute=%zu labeled=%zu\n", res.cliques.size(), res.attr_swaps.size(),
                  static_cast<std::size_t>(std::count(res.labels.begin(), res.labels.end(), 1)));
      fs::create_directories(inj_out);
      std::cout << write_multiplex(res.graph, inj_out, inj_stem).string() << '\n';
    } else if (*cfgcmd) {
      resolve(cfg_args);
    } else if (*tr) {
      const Config cfg = resolve(tr_args);
      const MultiplexGraph g = load_graph(tr_manifest, tr_std);
      std::ofstream dump;
      PlanObserver observe;
      if (!tr_dump.empty()) {
        dump = open_out(tr_dump);
        observe = [&](int epoch, const EpochPlan& p) { dump_plans(dump, p.mask, p.aug, "epoch=" + std::to_string(epoch)); };
      }
      auto [st, log] = train(g, cfg.model, cfg.mask, cfg.rwr, cfg.train, cfg.loss, observe);
      save_checkpoint(st, tr_out);
      if (!tr_log.empty()) write_file(tr_log, [&](std::ostream& o) { log.write_csv(o); });
      std::printf("loss first=%.6g last=%.6g\n", log.epochs.front().total, log.epochs.back().total);
    } else if (*sc) {
      const Config cfg = resolve(sc_args);
      const MultiplexGraph g = load_graph(sc_manifest, sc_std);
      const AnomalyScores s = score_with(g, cfg, sc_ckpt);
      const auto flags = sc_topk ? classify(s.fused, std::nullopt, sc_topk) : std::vector<int>(s.fused.size(), 0);
      write_file(sc_out, [&](std::ostream& o) { write_scores_csv(o, s, flags); });
    } else if (*dt) {
      const Config cfg = resolve(dt_args);
      const MultiplexGraph g = load_graph(dt_manifest, dt_std);
      const AnomalyScores s = score_with(g, cfg, dt_ckpt);
      std::vector<int> flags;
      if (dt_topk) {
        flags = classify(s.fused, std::nullopt, dt_topk);
      } else {
        const ThresholdResult t = select_threshold(s.fused);
        std::printf("threshold=%.17g knee=%zu flagged=%zu method=%s\n", t.threshold, t.knee_index, t.flagged_count, t.method.c_str());
        flags = classify(s.fused, t, std::nullopt);
      }
      write_file(dt_out, [&](std::ostream& o) { write_scores_csv(o, s, flags); });
      if (!dt_curve.empty()) write_file(dt_curve, [&](std::ostream& o) { write_curve_csv(o, ranked_curve(s.fused)); });
      const auto labels = labels_for(g, dt_labels);
      if (!labels.empty()) print_metrics(s.fused, flags, labels);
    } else if (*ev) {
      const ScoreTable t = read_scores_csv(ev_scores);
      const auto labels = read_labels(ev_labels, t.flags.size());
      print_metrics(t.scores.fused, t.flags, labels);
    } else if (*cv) {
      const ScoreTable t = read_scores_csv(cv_scores);
      const ScoreCurve c = ranked_curve(t.scores.fused);
      write_file(cv_out, [&](std::ostream& o) { write_curve_csv(o, c); });
      const ThresholdResult th = select_threshold(t.scores.fused);
      std::printf("threshold=%.17g knee=%zu flagged=%zu method=%s\n", th.threshold, th.knee_index, th.flagged_count, th.method.c_str());
    }
  } catch (const UsageError& e) {
    std::cerr << "umgad: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "umgad: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "umgad: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "umgad: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
