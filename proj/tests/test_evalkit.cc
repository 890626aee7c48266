#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "test_util.h"
#include "tdparse/evalkit.h"
#include "tdparse/learner.h"

using namespace tdparse;
using testutil::geo;

namespace {

const Model& trained() {
  static const Model m = [] {
    auto data = make_training_set(read_dataset_file(testutil::data_path("geo_train.tsv"), geo()));
    TrainerConfig cfg;
    cfg.iterations = 5;
    forced_decode_pass1(data, geo(), cfg);
    return train(data, geo(), cfg);
  }();
  return m;
}

std::vector<Example> geo_test() {
  return read_dataset_file(testutil::data_path("geo_test.tsv"), geo());
}

}  // namespace

TEST_CASE("precision, recall and F1 from counts") {
  EvalReport r = make_report(10, 8, 6);
  CHECK(std::abs(r.precision - 0.75) < 1e-12);
  CHECK(std::abs(r.recall - 0.6) < 1e-12);
  CHECK(std::abs(r.f1 - 2.0 / 3.0) < 1e-12);
  CHECK(r.warnings.empty());

  EvalReport all = make_report(5, 5, 5);
  CHECK(all.precision == 1.0);
  CHECK(all.recall == 1.0);
  CHECK(all.f1 == 1.0);

  EvalReport none = make_report(4, 4, 0);
  CHECK(none.precision == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(none.warnings.empty());
}

TEST_CASE("zero denominators give zero with a warning") {
  EvalReport unparsed = make_report(3, 0, 0);
  CHECK(unparsed.precision == 0.0);
  CHECK(unparsed.recall == 0.0);
  CHECK(unparsed.f1 == 0.0);
  CHECK(unparsed.warnings.size() == 1);

  EvalReport empty = make_report(0, 0, 0);
  CHECK(empty.f1 == 0.0);
  CHECK(empty.warnings.size() == 2);
  CHECK_FALSE(std::isnan(empty.precision));
}

TEST_CASE("report formatting") {
  EvalReport r = make_report(10, 8, 6);
  std::string kv = format_key_values(r);
  CHECK(kv.find("total=10\n") != std::string::npos);
  CHECK(kv.find("parsed=8\n") != std::string::npos);
  CHECK(kv.find("correct=6\n") != std::string::npos);
  CHECK(kv.find("precision=0.75\n") != std::string::npos);
  CHECK(kv.find("recall=0.6\n") != std::string::npos);
  CHECK(kv.find("f1=0.666666666667\n") != std::string::npos);
  std::string table = format_table(r);
  CHECK(table.find("precision") != std::string::npos);
  CHECK(table.find("0.7500") != std::string::npos);
}

TEST_CASE("evaluating a trained model on held-out questions") {
  auto data = geo_test();
  const Model& m = trained();
  std::string before = m.save();
  EvalOptions opts;
  EvalReport r = evaluate(m, data, geo(), opts);
  CHECK(m.save() == before);
  CHECK(r.total == data.size());
  CHECK(r.outcomes.size() == data.size());
  std::size_t parsed = 0, correct = 0;
  for (const auto& o : r.outcomes) {
    parsed += o.parsed;
    correct += o.correct;
    if (o.correct) CHECK(o.parsed);
    if (o.parsed) CHECK(o.actions <= 2 * o.tokens - 1);
  }
  CHECK(r.parsed == parsed);
  CHECK(r.correct == correct);
  CHECK(static_cast<double>(r.correct) / r.total >= 0.9);

  opts.workers = 3;
  EvalReport threaded = evaluate(m, data, geo(), opts);
  CHECK(threaded.correct == r.correct);
  CHECK(threaded.parsed == r.parsed);
  for (std::size_t k = 0; k < data.size(); ++k)
    CHECK(threaded.outcomes[k].predicted == r.outcomes[k].predicted);
}

TEST_CASE("an empty model parses nothing correctly without failing") {
  Model zero;
  EvalReport r = evaluate(zero, geo_test(), geo(), {});
  CHECK(r.total == 10);
  CHECK(r.correct <= r.parsed);
  EvalReport empty = evaluate(zero, {}, geo(), {});
  CHECK(empty.total == 0);
  CHECK(empty.f1 == 0.0);
  CHECK_FALSE(empty.warnings.empty());
}

TEST_CASE("goal type restricts predictions") {
  auto data = geo_test();
  EvalOptions opts;
  opts.goal_type = Type::base("rv");
  EvalReport r = evaluate(trained(), data, geo(), opts);
  for (std::size_t k = 0; k < data.size(); ++k)
    if (r.outcomes[k].parsed)
      CHECK(geo().parse_mr(r.outcomes[k].predicted).type == Type::base("rv"));
}
