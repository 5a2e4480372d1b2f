#include <doctest.h>

#include <cstdlib>

#include "ehg/config.hpp"
#include "ehg/errors.hpp"
#include "test_support.hpp"

using namespace ehg;

TEST_CASE("defaults") {
  const auto c = parse_config("");
  CHECK(c.dataset_kind == DatasetKind::Tpehgt);
  CHECK(c.segmentation == SegmentationMode::Annotated);
  CHECK(c.window_seconds == 180.0);
  CHECK(c.filter_order == 4);
  CHECK(c.klt.lag == 50);
  CHECK(c.klt.jump_threshold == 0.10);
  CHECK(c.features.mfcc.n_coeffs == 20);
  CHECK(c.features.wavelet_levels == 5);
  CHECK(c.iterations == 20);
  CHECK(c.folds == 5);
  CHECK(c.failure_budget == 0.01);
  const auto specs = c.model_specs();
  REQUIRE(specs.size() == 8);
  CHECK(specs.back().display_name() == "CB-substitute");
  CHECK(specs.back().kind == ModelKind::Gb);
  // the shipped template parses to the defaults
  CHECK(emit_config(parse_config(default_config_text())) == emit_config(c));
}

TEST_CASE("round trip through the emitted form") {
  const auto c = parse_config(
      "[dataset]\nkind = TPEHG\n"
      "[segmentation]\nmode = fixed\nwindow_seconds = 90.5\n"
      "[klt]\nenabled = false\nlag = 40\n"
      "[models]\nlist = QDA, RF, CB\n"
      "[models.rf]\nn_estimators = 25\n"
      "[evaluation]\nmaster_seed = 123456789012345\ngrouped_by_record = true\n"
      "[pa]\nband = maternal_heart\n");
  const auto text = emit_config(c);
  const auto again = parse_config(text);
  CHECK(emit_config(again) == text);
  CHECK(again.dataset_kind == DatasetKind::Tpehg);
  CHECK(again.window_seconds == 90.5);
  CHECK(!again.klt_enabled);
  CHECK(again.klt.lag == 40);
  CHECK(again.rf.n_estimators == 25);
  CHECK(again.master_seed == 123456789012345ull);
  CHECK(again.grouped_by_record);
  CHECK(again.model_specs().size() == 3);
}

TEST_CASE("strictness") {
  CHECK_THROWS_AS(parse_config("[dataset]\nrooot = x\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[models]\nlist = QDA, XGB\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[models]\nlist =\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[evaluation]\nfolds = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[klt]\nlag = x\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[klt]\nlag = 10\nlag = 11\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[nosuch]\nkey = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[filter]\nlow_hz = 6\n"), ValidationError);
  try {
    parse_config("# comment\n[run]\njobs = 2\nbogus = 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("data root override") {
  const auto c = parse_config("[dataset]\nroot = /somewhere\n", std::string("/elsewhere"));
  CHECK(c.dataset_root == "/elsewhere");
}

TEST_CASE("referenced paths are checked by the dataset verbs") {
  testing::TempDir dir("cfg");
  auto c = parse_config("");
  c.dataset_root = dir.path() / "missing";
  CHECK_THROWS_AS(check_dataset_paths(c, false), ValidationError);
  c.dataset_root = dir.path();
  CHECK_THROWS_AS(check_dataset_paths(c, true), ValidationError);  // no annotations.csv
  testing::write_text(dir.path() / "annotations.csv", "record,kind,start_sample,end_sample\n");
  CHECK_NOTHROW(check_dataset_paths(c, true));
}
