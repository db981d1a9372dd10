#include <gtest/gtest.h>
#include <sys/wait.h>

#include <fstream>
#include <sstream>

#include "svbrdf/svbrdf.hpp"

using namespace svbrdf;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  fs::path dir;
  std::string output;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("svbrdf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  int run(const std::string& args) {
    const fs::path log = dir / "log.txt";
    const std::string cmd = std::string(SVBRDF_CLI) + " --threads 1 " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    output = io::read_text(log);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  // A 16 px material and one scene, rendered to inputs/view.pfm.
  void make_inputs() {
    io::write_bundle(dir / "gt", procedural_material(16, 5));
    Rng rng(11);
    GenConfig cfg;
    cfg.perturbations_enabled = false;
    io::write_scene(dir / "scene.txt", sample_scene(cfg, rng));
    ASSERT_EQ(run("--out " + (dir / "inputs").string() + " render --material " + (dir / "gt").string() +
                  " --scene " + (dir / "scene.txt").string() + " --name view"),
              0)
        << output;
    fs::remove(dir / "inputs" / "view.png");
  }
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_F(Cli, HelpListsCommandsAndGlobalFlags) {
  EXPECT_EQ(run("--help"), 0);
  for (const char* s : {"render", "generate", "optimize", "rectify", "eval", "net-forward", "net-train", "--seed",
                        "--threads", "--out", "--config"})
    EXPECT_NE(output.find(s), std::string::npos) << s;
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("render --bogus 1"), 2);
  EXPECT_EQ(run("render --material a"), 2);
  fs::create_directories(dir / "empty");
  EXPECT_EQ(run("--out " + dir.string() + " generate --library " + (dir / "empty").string()), 2);
  EXPECT_NE(output.find("no material bundles"), std::string::npos) << output;
}

TEST_F(Cli, MissingFilesExitThree) {
  io::write_scene(dir / "scene.txt", SceneSample{});
  EXPECT_EQ(run("--out " + dir.string() + " render --material " + (dir / "nope").string() + " --scene " +
                (dir / "scene.txt").string()),
            3);
  EXPECT_EQ(run("--out " + dir.string() + " optimize --inputs " + (dir / "nope").string()), 3);
  EXPECT_EQ(run("--out " + dir.string() + " generate --library " + (dir / "nope").string()), 3);
}

TEST_F(Cli, ConfigFile) {
  make_inputs();
  io::write_text(dir / "ok.ini", "seed=3\n[render]\nname=from_config\n");
  EXPECT_EQ(run("--config " + (dir / "ok.ini").string() + " --out " + dir.string() + " render --material " +
                (dir / "gt").string() + " --scene " + (dir / "scene.txt").string()),
            0)
      << output;
  EXPECT_TRUE(fs::exists(dir / "from_config.pfm"));
  io::write_text(dir / "bad.ini", "[render]\ncolour=red\n");
  EXPECT_EQ(run("--config " + (dir / "bad.ini").string() + " render --material a --scene b"), 2);
  EXPECT_NE(output.find("colour"), std::string::npos) << output;
}

TEST_F(Cli, RenderWritesImagesAndSidecar) {
  make_inputs();
  const Image pfm = io::read_pfm(dir / "inputs" / "view.pfm");
  EXPECT_EQ(pfm.width(), 16);
  EXPECT_EQ(pfm.height(), 16);
  EXPECT_EQ(io::read_scene(dir / "inputs" / "view.txt"), io::read_scene(dir / "scene.txt"));
  const std::string render = " render --material " + (dir / "gt").string() + " --scene " +
                             (dir / "scene.txt").string() + " --noise-sigma 0.05";
  ASSERT_EQ(run("--seed 4 --out " + (dir / "a").string() + render), 0);
  ASSERT_EQ(run("--seed 4 --out " + (dir / "b").string() + render), 0);
  ASSERT_EQ(run("--seed 5 --out " + (dir / "c").string() + render), 0);
  EXPECT_EQ(io::read_text(dir / "a" / "render.png"), io::read_text(dir / "b" / "render.png"));
  EXPECT_NE(io::read_text(dir / "a" / "render.png"), io::read_text(dir / "c" / "render.png"));
}

TEST_F(Cli, GenerateHonoursCount) {
  ASSERT_EQ(run("--out " + dir.string() +
                " generate --procedural 2 --procedural-size 32 --count 3 --crop-size 16 --inputs-max 2"),
            0)
      << output;
  for (int i = 0; i < 3; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "sample_%05d", i);
    EXPECT_EQ(io::read_bundle(dir / name / "gt").width, 16);
    EXPECT_TRUE(fs::exists(dir / name / "input_00.png"));
  }
  EXPECT_FALSE(fs::exists(dir / "sample_00003"));
}

TEST_F(Cli, OptimizeFromGroundTruthHasNearZeroObjective) {
  make_inputs();
  ASSERT_EQ(run("--out " + (dir / "fit").string() + " optimize --inputs " + (dir / "inputs").string() + " --init " +
                (dir / "gt").string() + " --tv-weight 0 --iters 3"),
            0)
      << output;
  const auto rows = lines(io::read_text(dir / "fit" / "loss.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "iteration,objective,tv,render");
  const std::string first = rows[1].substr(rows[1].find(',') + 1);
  EXPECT_LT(std::stod(first.substr(0, first.find(','))), 1e-6);
  EXPECT_TRUE(validate(io::read_bundle(dir / "fit" / "maps")).empty());
}

TEST_F(Cli, RectifyOutputSize) {
  Image photo(40, 30, 3, 0.5);
  io::write_png(dir / "photo.png", photo);
  io::write_text(dir / "corners.txt", "5,4\n35,6\n33,27\n7,25\n");
  ASSERT_EQ(run("rectify --in " + (dir / "photo.png").string() + " --corners " + (dir / "corners.txt").string() +
                " --size 20 --out " + (dir / "rect.png").string()),
            0)
      << output;
  const LdrImage r = io::read_png(dir / "rect.png");
  EXPECT_EQ(r.width(), 20);
  EXPECT_EQ(r.height(), 20);
  EXPECT_EQ(run("rectify --in " + (dir / "photo.png").string() + " --corner 1,1 --corner 2,2"), 2);
}

TEST_F(Cli, TrainThenForward) {
  make_inputs();
  ASSERT_EQ(run("--out " + (dir / "net").string() +
                " net-train --procedural 2 --procedural-size 32 --iters 2 --batch 1 --input-size 16 --depth 2"
                " --base-channels 4 --global-dim 8 --joint-channels 8"),
            0)
      << output;
  EXPECT_EQ(lines(io::read_text(dir / "net" / "train_loss.csv")).size(), 3u);
  ASSERT_EQ(run("--out " + (dir / "pred").string() + " net-forward --checkpoint " +
                (dir / "net" / "net.svfn").string() + " --inputs " + (dir / "inputs").string()),
            0)
      << output;
  EXPECT_EQ(io::read_bundle(dir / "pred" / "maps").width, 16);
}

TEST_F(Cli, EvalWritesCsv) {
  ASSERT_EQ(run("--out " + dir.string() +
                " eval --procedural 2 --procedural-size 16 --predictor constant --ks 1,2 --n-render 2"),
            0)
      << output;
  const auto rows = lines(io::read_text(dir / "eval.csv"));
  EXPECT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[1].substr(0, 4), "0,1,");
  EXPECT_TRUE(fs::exists(dir / "plot_ssim_render.csv"));
}
