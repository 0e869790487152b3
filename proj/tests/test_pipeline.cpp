#include "fixtures.hpp"
#include "toolqa/error.hpp"
#include "toolqa/pipeline.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <thread>

namespace toolqa {
namespace {

using testing::density_record;
using testing::hedge_gains_record;

Record crowd_record() {
  Record r;
  r.id = "crowd";
  r.dataset = DatasetTag::WikiSql;
  r.instruction = "How many people watched at Glenferrie Oval?";
  r.data = parse_table(testing::kCrowdTableJson);
  r.derivation = testing::kCrowdQuery;
  return r;
}

Record sentiment_record() {
  Record r;
  r.id = "fpb";
  r.dataset = DatasetTag::Fpb;
  r.instruction = std::string(kSentimentInstruction);
  r.input = "Operating profit improved by 27% to EUR 579.8mn from EUR 457.2mn in 2006.";
  r.response = "positive";
  return r;
}

// Counts concurrent generate() calls.
class SlowEcho : public Backend {
 public:
  explicit SlowEcho(const std::vector<Record>& rs) : inner_(rs) {}
  std::string generate(const GenerationRequest& request) const override {
    const int now = ++active_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
    --active_;
    return inner_.generate(request);
  }
  int peak() const { return peak_.load(); }

 private:
  EchoGoldBackend inner_;
  mutable std::atomic<int> active_{0};
  mutable std::atomic<int> peak_{0};
};

TEST(CleanToolArgument, TrimsOnePeriod) {
  EXPECT_EQ(clean_tool_argument("  0.74-2.06.\n"), "0.74-2.06");
  EXPECT_EQ(clean_tool_argument("SELECT a FROM data_table"), "SELECT a FROM data_table");
  EXPECT_EQ(clean_tool_argument("1.."), "1.");
}

TEST(Route, EchoGold) {
  const std::vector<Record> rs{hedge_gains_record(), density_record()};
  const EchoGoldBackend b(rs);
  EXPECT_EQ(route(rs[0], b), TemplateKind::Arithmetic);
  EXPECT_EQ(route(rs[1], b), TemplateKind::Script);
  ReplayFixture poem;
  poem.add(render_prompt(TemplateKind::TemplateChoice, rs[0]), "poem");
  EXPECT_THROW(route(rs[0], ReplayBackend(poem)), Error);
}

TEST(Solve, ToolsAndDirectAnswers) {
  const std::vector<Record> rs{crowd_record(), sentiment_record(), hedge_gains_record()};
  const EchoGoldBackend b(rs);
  const DispatchOutcome sql = solve(rs[0], TemplateKind::Script, b);
  EXPECT_EQ(sql.tool_result, "5000");
  EXPECT_EQ(sql.final_answer, "5000");
  EXPECT_EQ(sql.raw_model_output, testing::kCrowdQuery);
  const DispatchOutcome cls = solve(rs[1], TemplateKind::Classification, b);
  EXPECT_EQ(cls.final_answer, "positive");
  EXPECT_FALSE(cls.tool_result);
  const DispatchOutcome calc = solve(rs[2], TemplateKind::Arithmetic, b);
  EXPECT_EQ(calc.final_answer, "-0.2739726027");
  try {
    solve(rs[1], TemplateKind::Script, b);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingAttribute);
  }
}

TEST(Backoff, ToolFailureFallsBackToDirectAnswer) {
  const std::vector<Record> rs{hedge_gains_record(), crowd_record()};
  const ReplayBackend b(testing::fixture_with_broken_tools(rs, {0, 1}));
  const DispatchOutcome a = answer_with_backoff(rs[0], b);
  EXPECT_TRUE(a.used_backoff);
  EXPECT_EQ(a.route, TemplateKind::Arithmetic);
  ASSERT_TRUE(a.error);
  EXPECT_EQ(a.error->kind, ErrorKind::DivisionByZero);
  EXPECT_EQ(a.final_answer, "-0.2739726027");
  const DispatchOutcome s = answer_with_backoff(rs[1], b);
  EXPECT_TRUE(s.used_backoff);
  EXPECT_EQ(s.error->kind, ErrorKind::ParseError);
  EXPECT_EQ(s.final_answer, "5000");

  const DispatchOutcome none = answer_without_backoff(rs[0], b);
  EXPECT_FALSE(none.used_backoff);
  EXPECT_FALSE(none.final_answer);
  EXPECT_EQ(none.error->kind, ErrorKind::DivisionByZero);
  EXPECT_EQ(none.error->stage, "calc");
}

TEST(Backoff, UnknownTemplateFallsBack) {
  const Record r = sentiment_record();
  ReplayFixture f;
  f.add(render_prompt(TemplateKind::TemplateChoice, r), "I would use SQL");
  f.add(render_prompt(TemplateKind::Classification, r), "positive");
  const ReplayBackend b(f);
  const DispatchOutcome o = answer_with_backoff(r, b);
  EXPECT_TRUE(o.used_backoff);
  EXPECT_EQ(o.final_answer, "positive");
  EXPECT_EQ(o.error->kind, ErrorKind::UnknownTemplate);
  const DispatchOutcome no = answer_without_backoff(r, b);
  EXPECT_FALSE(no.final_answer);
  EXPECT_EQ(no.error->kind, ErrorKind::UnknownTemplate);
}

TEST(Backoff, DataTemplateWithoutDataFallsBack) {
  const Record r = sentiment_record();
  ReplayFixture f;
  f.add(render_prompt(TemplateKind::TemplateChoice, r), "script");
  f.add(render_prompt(TemplateKind::Classification, r), "positive");
  const DispatchOutcome o = answer_with_backoff(r, ReplayBackend(f));
  EXPECT_TRUE(o.used_backoff);
  EXPECT_EQ(o.error->kind, ErrorKind::MissingAttribute);
  EXPECT_EQ(o.final_answer, "positive");
}

TEST(Backoff, BackendErrorsPropagate) {
  const Record r = sentiment_record();
  const ReplayBackend empty{ReplayFixture{}};
  try {
    answer_with_backoff(r, empty);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingFixtureEntry);
  }
}

TEST(RunBatch, OrderAndConcurrencyCap) {
  testing::TempDir dir;
  const auto files = testing::write_dataset_fixtures(dir.path(), 20);
  std::vector<Record> rs;
  for (auto tag : {DatasetTag::TatQa, DatasetTag::WikiSql, DatasetTag::Fpb, DatasetTag::OttQa}) {
    auto part = testing::load_fixture_dataset(files, tag);
    rs.insert(rs.end(), part.begin(), part.end());
  }
  const SlowEcho b(rs);
  const auto parallel = run_batch(rs, b, {3, true});
  EXPECT_LE(b.peak(), 3);
  const auto serial = run_batch(rs, EchoGoldBackend(rs), {1, true});
  ASSERT_EQ(parallel.size(), rs.size());
  EXPECT_EQ(parallel, serial);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    EXPECT_EQ(parallel[i].route, gold_template(rs[i]));
    EXPECT_FALSE(parallel[i].used_backoff);
  }
}

TEST(RunBatch, PerRecordErrorsDoNotAbort) {
  const std::vector<Record> rs{sentiment_record(), crowd_record()};
  const EchoGoldBackend partial({rs[1]});
  const auto out = run_batch(rs, partial);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].error->kind, ErrorKind::MissingFixtureEntry);
  EXPECT_EQ(out[1].final_answer, "5000");
}

TEST(OutcomeJson, RoundTrip) {
  DispatchOutcome o;
  o.route = TemplateKind::InformationExtraction;
  o.raw_model_output = "3";
  o.final_answer = "3";
  o.used_backoff = true;
  o.error = TaggedError{ErrorKind::NoRows, "execute", "no rows"};
  EXPECT_EQ(outcome_from_json(outcome_to_json(o)), o);
  EXPECT_EQ(outcome_from_json(outcome_to_json(DispatchOutcome{})), DispatchOutcome{});
  EXPECT_THROW(outcome_from_json({{"route", "template choice"}}), Error);
  EXPECT_THROW(outcome_from_json({{"route", "script"}, {"error", {{"kind", "Nope"}}}}), Error);
}

}  // namespace
}  // namespace toolqa
