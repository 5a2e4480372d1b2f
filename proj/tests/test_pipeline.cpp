#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include "ehg/commands.hpp"
#include "ehg/errors.hpp"
#include "ehg/pipeline.hpp"
#include "test_support.hpp"

using namespace ehg;
namespace fs = std::filesystem;

namespace {

PipelineConfig corpus_config(const fs::path& root, const fs::path& out, const std::string& extra = "") {
  std::ostringstream os;
  os << "[dataset]\nroot = " << root.string() << "\n"
     << "[run]\noutput_dir = " << out.string() << "\njobs = 2\n"
     << "[segmentation]\nwindow_seconds = 30\n"
     << "[evaluation]\niterations = 2\n"
     << "[models]\nlist = QDA, LR, DT, GB, CB\n"
     << "[models.gb]\nn_estimators = 10\n"
     << extra;
  return parse_config(os.str());
}

std::string slurp(const fs::path& p) { return read_text_file(p); }

std::size_t csv_columns(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);  // schema comment
  std::getline(is, line);
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EHG_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("ingest inventories the corpus") {
  testing::TempDir dir("ingest");
  testing::write_synthetic_corpus(dir.path() / "data");
  const auto c = corpus_config(dir.path() / "data", dir.path() / "out");
  const auto s = cmd_ingest(c);
  CHECK(s.records == 9);
  CHECK(s.preterm == 4);
  CHECK(s.term == 5);
  CHECK(s.annotations == 4 * 4 + 5 * 2);
  const auto csv = slurp(dir.path() / "out" / "ingest.csv");
  CHECK(csv.rfind("record,group,gestation_weeks,n_channels,n_samples,fs_hz,contractions,dummies\n", 0) == 0);
  CHECK(csv.find("tpehgt_p100,preterm,33.100000000000001,4,4800,20,2,2") != std::string::npos);
}

TEST_CASE("features: column-count law, row order and determinism") {
  testing::TempDir dir("feat");
  testing::write_synthetic_corpus(dir.path() / "data");
  auto c = corpus_config(dir.path() / "data", dir.path() / "out");

  const auto run = cmd_features(c);
  CHECK(run.data.rows() == 26);
  CHECK(run.data.features() == 171);
  CHECK(run.n_channels == 3);
  CHECK(run.failures.empty());
  CHECK(std::is_sorted(run.data.provenance.begin(), run.data.provenance.end()));
  std::size_t pos = 0;
  for (int y : run.data.y) pos += static_cast<std::size_t>(y);
  CHECK(pos == 16);
  const auto first = slurp(dir.path() / "out" / "features.csv");
  CHECK(csv_columns(first) == 3 + 171 + 1);
  CHECK(first.rfind("#ehg-features v1 kind=TPEHGT segmentation=annotated", 0) == 0);

  c.jobs = 1;
  cmd_features(c);
  CHECK(slurp(dir.path() / "out" / "features.csv") == first);

  const auto back = read_feature_csv(first);
  CHECK(back.data.x == run.data.x);
  CHECK_NOTHROW(check_feature_schema(back, c));
  auto other = c;
  other.klt_enabled = false;
  CHECK_THROWS_AS(check_feature_schema(back, other), ValidationError);
}

TEST_CASE("features: fixed windows with TOCO and the raw-channel path") {
  testing::TempDir dir("fixed");
  testing::SyntheticCorpusOptions o;
  o.raw_channels = true;
  testing::write_synthetic_corpus(dir.path() / "data", o);
  auto c = corpus_config(dir.path() / "data", dir.path() / "out",
                         "[channels]\nset = ehg_plus_toco\n[klt]\nenabled = false\n");
  c.segmentation = SegmentationMode::Fixed;
  const auto ds = load_dataset(c);
  const auto run = extract_features(ds, c);
  CHECK(run.data.rows() == 9 * 8);
  CHECK(run.data.features() == 4 * 57);
  CHECK(run.channel_roles.back() == ChannelRole::Toco);
  CHECK(run.data.feature_names.back() == "ch4_pa");

  // raw channels are band-passed here and land close to the acquisition-filtered copies
  c.use_prefiltered = false;
  c.channel_set = ChannelSet::EhgOnly;
  const auto sel = select_channels(ds.records.front(), c);
  CHECK(sel.needs_filter);
  CHECK(sel.indices.size() == 3);
  const auto raw = extract_features(ds, c);
  CHECK(raw.data.features() == 171);

  c.channel_set = ChannelSet::EhgPlusToco;
  testing::TempDir dir2("notoco");
  o.with_toco = false;
  testing::write_synthetic_corpus(dir2.path(), o);
  c.dataset_root = dir2.path();
  CHECK_THROWS_AS(extract_features(load_dataset(c), c), ValidationError);
}

TEST_CASE("channel pick on a TPEHG-style header") {
  Record r;
  r.header.record_name = "tpehg1007";
  for (const char* l : {"S1", "S2", "S3", "S1_DOCFILT-4-0.08-4", "S2_DOCFILT-4-0.08-4", "S3_DOCFILT-4-0.08-4",
                        "S1_DOCFILT-4-0.3-3", "S2_DOCFILT-4-0.3-3", "S3_DOCFILT-4-0.3-3", "S1_DOCFILT-4-0.3-4",
                        "S2_DOCFILT-4-0.3-4", "S3_DOCFILT-4-0.3-4"}) {
    ChannelInfo ci;
    ci.label = l;
    r.header.channels.push_back(ci);
  }
  auto c = parse_config("[dataset]\nkind = TPEHG\n");
  // no 0.08-5 copies here, so the raw channels are taken and filtered
  for (bool pre : {true, false}) {
    c.use_prefiltered = pre;
    const auto sel = select_channels(r, c);
    CHECK(sel.needs_filter);
    CHECK(sel.indices == std::vector<std::size_t>{0, 1, 2});
  }
}

TEST_CASE("evaluate, ablate and report") {
  testing::TempDir dir("eval");
  testing::write_synthetic_corpus(dir.path() / "data");
  auto c = corpus_config(dir.path() / "data", dir.path() / "out");
  cmd_features(c);

  const auto report = cmd_evaluate(c);
  CHECK(report.model_names == std::vector<std::string>{"QDA", "LR", "DT", "GB", "CB-substitute"});
  CHECK(report.cells.size() == 2 * 5 * 5);
  CHECK(report.balanced_rows == 20);
  const auto first = slurp(dir.path() / "out" / "report.csv");
  CHECK(read_report_csv(first).size() == 5 * 5);
  cmd_evaluate(c);
  CHECK(slurp(dir.path() / "out" / "report.csv") == first);
  CHECK(fs::exists(dir.path() / "out" / "cells.csv"));
  CHECK(fs::exists(dir.path() / "out" / "auc.dat"));

  // GB and its relabelled substitute are the same learner
  CHECK(report.summary[3].mean.auc == report.summary[4].mean.auc);

  auto mismatched = c;
  mismatched.klt_enabled = false;
  CHECK_THROWS_AS(cmd_evaluate(mismatched), ValidationError);

  auto grid = c;
  grid.ablate_preset = AblatePreset::Grid;
  grid.ablate_klt = {true};
  grid.ablate_toco = {true, false};
  grid.output_dir = dir.path() / "grid";
  const auto cells = cmd_ablate(grid);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].first.name() == "annotated_klt-on_toco-on");
  CHECK(cells[1].first.name() == "annotated_klt-on_toco-off");
  const auto toco_off = read_feature_csv(slurp(grid.output_dir / "ablate" / "annotated_klt-on_toco-off" / "features.csv"));
  CHECK(toco_off.data.features() == 171);
  // the TOCO-off cell is the EHG-only extraction
  CHECK(toco_off.data.x == read_feature_csv(slurp(dir.path() / "out" / "features.csv")).data.x);
  const auto merged = slurp(grid.output_dir / "ablation.csv");
  CHECK(merged.find("regime,klt,toco,model,metric,mean,sd\n") != std::string::npos);
  CHECK(merged.find("annotated,on,off,CB-substitute,auc,") != std::string::npos);

  std::ostringstream os;
  cmd_report(c, os);
  CHECK(os.str().find("CB-substitute") != std::string::npos);
  CHECK(fs::exists(dir.path() / "out" / "summary.txt"));
}

TEST_CASE("TPEHG reports carry the balanced-count note") {
  testing::TempDir dir("tpehg");
  testing::SyntheticCorpusOptions o;
  o.raw_channels = true;
  testing::write_synthetic_corpus(dir.path() / "data", o);
  auto c = corpus_config(dir.path() / "data", dir.path() / "out", "[dataset]\nkind = TPEHG\n");
  c.segmentation = SegmentationMode::Fixed;
  c.model_list = {"LR"};
  cmd_features(c);
  const auto r = cmd_evaluate(c);
  REQUIRE(r.notes.size() == 1);
  const auto csv = slurp(dir.path() / "out" / "report.csv");
  CHECK(csv.find("# note: TPEHG balanced sample is " + std::to_string(r.balanced_rows) + " rows") != std::string::npos);
  CHECK(read_report_csv(csv).size() == 5);
}

TEST_CASE("ablation grid arithmetic") {
  auto c = parse_config("");
  CHECK(ablation_cells(c).size() == 4);
  c.ablate_preset = AblatePreset::Grid;
  c.ablate_klt = {true};
  CHECK(ablation_cells(c).size() == 2);
  c.ablate_klt = {true, false};
  c.ablate_segmentation = {SegmentationMode::Annotated, SegmentationMode::Fixed};
  CHECK(ablation_cells(c).size() == 8);
}

TEST_CASE("cli exit codes") {
  testing::TempDir dir("cli");
  testing::write_synthetic_corpus(dir.path() / "data");
  const auto cfg = dir.path() / "run.ini";
  testing::write_text(cfg, "[dataset]\nroot = " + (dir.path() / "data").string() +
                               "\n[segmentation]\nwindow_seconds = 30\n[evaluation]\niterations = 1\n"
                               "[models]\nlist = LR\n");
  const std::string base = "--config " + cfg.string() + " --out " + (dir.path() / "out").string();
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli(base + " ingest") == 0);
  CHECK(run_cli(base + " features --jobs 1") == 0);
  CHECK(run_cli(base + " --seed 7 evaluate") == 0);
  CHECK(run_cli(base + " report") == 0);
  CHECK(run_cli("--no-such-flag") == 1);
  CHECK(run_cli("--config " + (dir.path() / "nope.ini").string() + " ingest") == 1);
  testing::write_text(dir.path() / "bad.ini", "[models]\nlist = QDA, NOPE\n");
  CHECK(run_cli("--config " + (dir.path() / "bad.ini").string() + " evaluate") == 1);
  // a feature file that is not readable as one fails validation, not at runtime
  testing::write_text(dir.path() / "junk.csv", "not a feature file\n");
  CHECK(run_cli(base + " --features " + (dir.path() / "junk.csv").string() + " evaluate") == 1);
  // an unwritable output directory is a runtime failure
  CHECK(run_cli("--config " + cfg.string() + " --features " + (dir.path() / "out" / "features.csv").string() +
                " --out /proc/ehg-no-such-dir evaluate") == 2);
}
