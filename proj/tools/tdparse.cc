// tdparse: command-line driver for the type-driven shift-reduce parser.
//
//   tdparse parse        --domain D --model M [--trace] words...
//   tdparse trace        --domain D [--model M | --actions "sk sh:1:0 ..."] words...
//   tdparse train        --domain D --data TSV --model OUT [--refs CACHE]
//   tdparse eval         --domain D --data TSV --model M
//   tdparse force-decode --domain D --data TSV [--refs OUT]

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tdparse/dataset.h"
#include "tdparse/evalkit.h"
#include "tdparse/learner.h"
#include "tdparse/parser.h"

namespace {

using namespace tdparse;

struct RunConfig {
  std::string domain;
  std::string data;
  std::string model;
  std::string refs;
  std::string templates;
  std::string actions;
  std::string goal_type;
  std::vector<std::string> words;
  std::size_t beam = 16;
  int iters = 20;
  double time_limit = 60.0;
  std::size_t pass2_beam = 1024;
  std::uint64_t seed = 1;
  int workers = 1;
  bool trace = false;
  bool simple_types = false;
  bool no_averaging = false;
  bool early_update = false;
  bool show = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << text;
}

Domain load(const RunConfig& c) {
  Domain d = load_domain_file(c.domain);
  return c.simple_types ? d.simplified() : d;
}

std::optional<Type> goal(const RunConfig& c, const Domain& d) {
  if (c.goal_type.empty()) return std::nullopt;
  Type t = d.symbols().normalize(parse_type(c.goal_type));
  d.hierarchy().check_known(t);
  return t;
}

Model load_model(const RunConfig& c) {
  if (c.model.empty()) return Model{};
  return Model::load_file(c.model);
}

Sentence sentence_of(const RunConfig& c) {
  std::string text;
  for (const auto& w : c.words) text += (text.empty() ? "" : " ") + w;
  Sentence x = make_sentence(text);
  if (x.tokens.empty()) throw UsageError("empty sentence");
  return x;
}

void print_trace(const ParserState& s, const Sentence& x, const Domain& d) {
  std::printf("0\t-\t(empty)\t%s\n",
              x.tokens.empty() ? "-" : (x.tokens[0] + (x.size() > 1 ? "..." : "")).c_str());
  for (const auto& line : trace_lines(s, x, d)) std::printf("%s\n", line.c_str());
}

int cmd_parse(const RunConfig& c, bool force_trace) {
  Domain d = load(c);
  Sentence x = sentence_of(c);
  Model m = load_model(c);
  TransitionSystem ts(d, &m, goal(c, d));
  StatePtr best;
  if (!c.actions.empty()) {
    best = ts.replay(actions_from_string(c.actions), x);
  } else {
    SearchOptions opts;
    opts.beam_width = c.beam;
    best = beam_search(ts, x, opts).best;
    if (!best) {
      std::fprintf(stderr, "no parse found\n");
      return 1;
    }
  }
  if (c.trace || force_trace) print_trace(*best, x, d);
  if (!ts.is_final(*best, x)) {
    std::fprintf(stderr, "derivation is not final: %s\n",
                 stack_string(*best, d).c_str());
    return force_trace ? 0 : 1;
  }
  const StackItem& item = best->stack->item;
  std::printf("%s\n", d.print(item.value.expr).c_str());
  std::printf("type=%s score=%.6g actions=%s\n", item_type_string(item).c_str(),
              best->score, actions_to_string(best->actions()).c_str());
  return 0;
}

TrainerConfig trainer_config(const RunConfig& c, const Domain& d) {
  TrainerConfig cfg;
  cfg.iterations = c.iters;
  cfg.beam_width = c.beam;
  cfg.pass1_time_limit = c.time_limit;
  cfg.pass2_beam = c.pass2_beam;
  cfg.averaging = !c.no_averaging;
  cfg.early_update = c.early_update;
  cfg.seed = c.seed;
  cfg.workers = c.workers;
  cfg.goal_type = goal(c, d);
  return cfg;
}

void print_coverage(const char* label, const CoverageReport& r) {
  std::fprintf(stderr, "%s: covered %zu/%zu (%.1f%%), new %zu, timed out %zu\n", label,
               r.covered, r.total, 100.0 * r.coverage(), r.newly_covered, r.timed_out);
  for (int id : r.uncovered) std::fprintf(stderr, "  uncovered example %d\n", id);
}

int cmd_force_decode(const RunConfig& c) {
  Domain d = load(c);
  auto data = make_training_set(read_dataset_file(c.data, d));
  TrainerConfig cfg = trainer_config(c, d);
  CoverageReport r = forced_decode_pass1(data, d, cfg);
  print_coverage("pass 1", r);
  std::size_t refs = 0;
  for (const auto& ex : data) refs += ex.references.size();
  std::printf("covered=%zu\ntotal=%zu\ncoverage=%.6f\nreferences=%zu\n", r.covered,
              r.total, r.coverage(), refs);
  if (!c.refs.empty()) write_file(c.refs, save_references(data));
  return 0;
}

int cmd_train(const RunConfig& c) {
  Domain d = load(c);
  auto data = make_training_set(read_dataset_file(c.data, d));
  TrainerConfig cfg = trainer_config(c, d);
  if (!c.templates.empty()) cfg.templates = FeatureTemplateSet::parse(read_file(c.templates));

  bool cached = !c.refs.empty() && std::filesystem::exists(c.refs);
  CoverageReport cover;
  if (cached) {
    load_references(read_file(c.refs), data);
    cover.total = data.size();
    for (const auto& ex : data) {
      if (ex.covered())
        ++cover.covered;
      else
        cover.uncovered.push_back(ex.example.id);
    }
    print_coverage("cached references", cover);
  } else {
    cover = forced_decode_pass1(data, d, cfg);
    print_coverage("pass 1", cover);
  }
  if (cover.covered == 0) {
    std::fprintf(stderr, "forced decoding covered no example; check the lexicon\n");
    return 1;
  }

  auto log_epoch = [](const EpochStats& s) {
    std::fprintf(stderr, "epoch %d: updates %zu/%zu, training exact match %zu/%zu\n",
                 s.epoch, s.updates, s.examples, s.correct, s.examples);
  };
  auto run_training = [&] { return train(data, d, cfg, log_epoch); };
  Model model = run_training();
  if (!cover.uncovered.empty()) {
    CoverageReport second = forced_decode_pass2(data, d, model, cfg);
    print_coverage("pass 2", second);
    cover = second;
    if (second.newly_covered > 0) model = run_training();
  }
  if (!c.refs.empty() && !cached) write_file(c.refs, save_references(data));
  model.meta["coverage"] = std::to_string(cover.covered) + "/" + std::to_string(cover.total);
  model.save_file(c.model);
  std::printf("model=%s\ncovered=%zu\ntotal=%zu\ncoverage=%.6f\nfeatures=%zu\n",
              c.model.c_str(), cover.covered, cover.total, cover.coverage(),
              model.weights.size());
  return 0;
}

int cmd_eval(const RunConfig& c) {
  Domain d = load(c);
  auto data = read_dataset_file(c.data, d);
  Model m = load_model(c);
  EvalOptions opts;
  opts.beam_width = c.beam;
  opts.goal_type = goal(c, d);
  opts.workers = c.workers;
  EvalReport r = evaluate(m, data, d, opts);
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (c.show) {
    for (const auto& o : r.outcomes)
      std::printf("%d\t%s\t%s\t%s\n", o.id, o.correct ? "correct" : o.parsed ? "wrong" : "none",
                  data[o.id].question.c_str(), o.predicted.c_str());
  }
  std::printf("%s%s", format_table(r).c_str(), format_key_values(r).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Type-driven incremental semantic parser"};
  app.require_subcommand(1);
  RunConfig c;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--domain", c.domain, "Domain file")->required()->check(CLI::ExistingFile);
    sub->add_option("--beam", c.beam, "Beam width")->check(CLI::PositiveNumber);
    sub->add_option("--goal-type", c.goal_type, "Required type of the final expression");
    sub->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--simple-types", c.simple_types,
                  "Collapse domain base types to e (i and t kept)");
  };

  auto* parse = app.add_subcommand("parse", "Parse a sentence and print its MR");
  auto* trace = app.add_subcommand("trace", "Print the step table of a derivation");
  for (auto* sub : {parse, trace}) {
    common(sub);
    sub->add_option("--model", c.model, "Model file")->check(CLI::ExistingFile);
    sub->add_option("--actions", c.actions, "Replay these action codes instead of decoding");
    sub->add_option("words", c.words, "Sentence");
  }
  parse->add_flag("--trace", c.trace, "Print the step table");

  auto* train_cmd = app.add_subcommand("train", "Forced decoding then perceptron training");
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a dataset");
  auto* force = app.add_subcommand("force-decode", "Find reference derivations");
  for (auto* sub : {train_cmd, eval_cmd, force}) {
    common(sub);
    sub->add_option("--data", c.data, "Dataset (question<TAB>mr)")->required()->check(CLI::ExistingFile);
  }
  for (auto* sub : {train_cmd, force}) {
    sub->add_option("--time-limit", c.time_limit, "Forced-decoding seconds per example")
        ->check(CLI::PositiveNumber);
    sub->add_option("--refs", c.refs, "Reference-derivation cache");
    sub->add_option("--seed", c.seed, "Shuffle seed");
  }
  train_cmd->add_option("--model", c.model, "Output model file")->required();
  train_cmd->add_option("--iters", c.iters, "Training epochs")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--pass2-beam", c.pass2_beam, "Beam for the guided forced-decoding pass")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--templates", c.templates, "Feature template file")->check(CLI::ExistingFile);
  train_cmd->add_flag("--no-averaging", c.no_averaging, "Keep the final weights unaveraged");
  train_cmd->add_flag("--early-update", c.early_update,
                      "Update where the reference first leaves the beam");
  eval_cmd->add_option("--model", c.model, "Model file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_flag("--show", c.show, "Print each prediction");
  app.add_flag("--trace", c.trace, "Print the step table (parse)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (parse->parsed()) return cmd_parse(c, false);
    if (trace->parsed()) return cmd_parse(c, true);
    if (train_cmd->parsed()) return cmd_train(c);
    if (eval_cmd->parsed()) return cmd_eval(c);
    if (force->parsed()) return cmd_force_decode(c);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
