#include <gtest/gtest.h>

#include "json.hpp"
#include "support/cli.hpp"

namespace fs = std::filesystem;

TEST(Cli, PipelineRunsAndIsReproducible) {
  const auto a = cli::scratch("cli_a"), b = cli::scratch("cli_b");
  ASSERT_EQ(cli::run_pipeline(a), 0) << cli::slurp(a / "log.txt");
  ASSERT_EQ(cli::run_pipeline(b), 0) << cli::slurp(b / "log.txt");
  for (const auto& f : cli::pipeline_outputs()) {
    EXPECT_FALSE(cli::slurp(a / f).empty()) << f;
    EXPECT_EQ(cli::slurp(a / f), cli::slurp(b / f)) << f;
  }
  const auto split = cli::slurp(a / "split.csv");
  EXPECT_EQ(split.rfind("photo_id,photographer_id,capture_date,split\n", 0), 0u);
  EXPECT_EQ(std::count(split.begin(), split.end(), '\n'), 25);
}

TEST(Cli, WeightsAndPreprocess) {
  const auto d = cli::scratch("cli_misc");
  ASSERT_EQ(cli::run({"weights", "--labels", cli::data("labels.csv"), "--out", (d / "w.csv").string()}), 0);
  EXPECT_EQ(cli::slurp(d / "w.csv"),
            "class_index,class,count,weight\n0,ph_a,8,1\n1,ph_b,8,1\n2,ph_c,8,1\n");
  ASSERT_EQ(cli::run({"preprocess", "--manifest", cli::data("manifest.csv"), "--out-dir", (d / "eq").string()}),
            0);
  EXPECT_TRUE(fs::exists(d / "eq" / "ph_a_00.ppm"));
}

TEST(Cli, ExitCodes) {
  const auto d = cli::scratch("cli_err");
  // Usage and argument errors.
  EXPECT_EQ(cli::run({}), 1);
  EXPECT_EQ(cli::run({"split"}), 1);
  EXPECT_EQ(cli::run({"split", "--manifest", "/nonexistent.csv", "--out", (d / "s.csv").string()}), 1);
  EXPECT_EQ(cli::run({"split", "--manifest", cli::data("manifest.csv"), "--fractions", "0.5,0.5,0.5", "--out",
                      (d / "s.csv").string()}),
            1);
  EXPECT_EQ(cli::run({"tsne", "--features", cli::data("features.csv"), "--perplexity", "50", "--out",
                      (d / "t.csv").string()}),
            1);

  // A bad row is reported and skipped unless --strict is given.
  {
    std::ofstream m(d / "manifest.csv");
    m << "photo_id,photographer_id,capture_date,image_path,width,height\n"
      << "a,P,1942-01-01,a.ppm,10,10\n"
      << "b,P,not a date,b.ppm,10,10\n";
  }
  const std::string manifest = (d / "manifest.csv").string();
  EXPECT_EQ(cli::run({"split", "--manifest", manifest, "--out", (d / "s.csv").string()}), 0);
  EXPECT_EQ(cli::run({"--strict", "split", "--manifest", manifest, "--out", (d / "s.csv").string()}), 1);
  EXPECT_EQ(cli::run({"fuse", "--manifest", cli::data("manifest.csv"), "--detections",
                      cli::data("detections_ssd.json"), "--threshold", "ssd=2", "--out",
                      (d / "f.json").string()}),
            1);
}

TEST(Cli, FusesFourDetectorFixtureIntoOnePerson) {
  const auto d = cli::scratch("cli_fixture");
  {
    std::ofstream m(d / "manifest.csv");
    m << "photo_id,photographer_id,capture_date,image_path,width,height\nimg,P,,img.ppm,640,480\n";
  }
  const std::vector<std::pair<std::string, std::string>> exports = {
      {"mask_rcnn", "[100, 50, 300, 400], \"confidence\": 0.92"},
      {"retinanet", "[104, 46, 296, 410], \"confidence\": 0.55"},
      {"ssd", "[98, 52, 306, 396], \"confidence\": 0.71"},
      {"yolov3", "[102, 48, 302, 402], \"confidence\": 0.83"}};
  std::vector<std::string> args = {"fuse", "--manifest", (d / "manifest.csv").string(), "--detections"};
  for (const auto& [id, body] : exports) {
    const auto path = d / (id + ".json");
    std::ofstream f(path);
    f << "{\"detector_id\": \"" << id << "\", \"detections\": [{\"photo_id\": \"img\", \"class\": \"person\", "
      << "\"box\": " << body << "}]}";
    args.push_back(path.string());
  }
  args.insert(args.end(), {"--out", (d / "fused.json").string()});
  ASSERT_EQ(cli::run(args), 0);
  const auto doc = nlohmann::json::parse(cli::slurp(d / "fused.json"));
  const auto& dets = doc.at("photos").at(0).at("detections");
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(dets[0].at("box"), nlohmann::json::parse("[101.0, 49.0, 301.0, 402.0]"));
  EXPECT_EQ(dets[0].at("members").size(), 4u);
}

TEST(Cli, IdenticalPhotographersHaveZeroDistance) {
  const auto d = cli::scratch("cli_emd");
  {
    std::ofstream f(d / "features.csv");
    f << "photo_id,photographer_id,f0,f1\n"
      << "a1,A,0.5,1\na2,A,2,-1\nb1,B,0.5,1\nb2,B,2,-1\n";
  }
  ASSERT_EQ(cli::run({"emd", "--features", (d / "features.csv").string(), "--out", (d / "emd.csv").string()}), 0);
  EXPECT_EQ(cli::slurp(d / "emd.csv"), "photographer_id,A,B\nA,0,0\nB,0,0\n");
}
