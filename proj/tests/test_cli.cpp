#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "dpyr/dpm_model.hpp"
#include "dpyr/feature_frontend.hpp"
#include "dpyr/image.hpp"
#include "dpyr/oracle.hpp"

using namespace dpyr;

namespace {

struct CmdResult {
  int status = -1;
  std::string output;  // stdout and stderr interleaved
};

// Runs the installed binary through the shell; DPYR_CLI_PATH is injected by
// the build so the tests always exercise the binary they were built with.
CmdResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + DPYR_CLI_PATH +
                          " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult r;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int rc = ::pclose(pipe);
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// On-disk inputs shared by the subprocess tests, built once per run.
struct Fixtures {
  std::filesystem::path dir;
  std::string image;      // small random PNG
  std::string pyramid;    // stub features exported from it
  std::string model;      // external model matching the pyramid
  std::string hog_model;  // hog31 model that cannot score the pyramid

  Fixtures() {
    dir = std::filesystem::temp_directory_path() /
          ("dpyr_cli_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);

    oracle::Rng rng(801);
    Image img(48, 64);
    for (auto& v : img.data) {
      v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    }
    image = (dir / "input.png").string();
    save_image(img, image);

    const FeaturePyramid pyr =
        build_feature_pyramid(img, StubExtractor(2), {64, 3, 2, 1, 1}, 8);
    pyramid = (dir / "features.dpyr").string();
    export_pyramid(pyr, pyramid);

    DpmModel m;
    m.class_name = "cli-probe";
    m.feature = {FeatureKind::external, 2, 8};
    Component comp;
    comp.root = Filter(1, 1, 2);
    comp.root.at(0, 0, 0) = 1.0f;
    comp.bias = 0.0;
    m.components.push_back(comp);
    model = (dir / "model.json").string();
    save_model(m, model);

    m.class_name = "hog-probe";
    m.feature = {FeatureKind::hog31, 31, 8};
    m.components[0].root = Filter(1, 1, 31);
    m.components[0].root.at(0, 0, 0) = 1.0f;
    hog_model = (dir / "hog_model.json").string();
    save_model(m, hog_model);
  }

  ~Fixtures() {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }

  std::string out(const char* name) const { return (dir / name).string(); }
};

const Fixtures& fx() {
  static Fixtures f;
  return f;
}

}  // namespace

TEST_CASE("no subcommand is a usage error") {
  CHECK(run_cli("").status == 2);
  CHECK(run_cli("frobnicate").status == 2);
}

TEST_CASE("--help exits cleanly") {
  const CmdResult r = run_cli("--help");
  CHECK(r.status == 0);
  CHECK(r.output.find("pyramid") != std::string::npos);
  CHECK(r.output.find("detect") != std::string::npos);
}

TEST_CASE("pyramid: a missing input file is reported by name") {
  const CmdResult r = run_cli("pyramid /no/such/image.png --features stub "
                              "--out /tmp/never.dpyr");
  CHECK(r.status == 2);
  CHECK(r.output.find("/no/such/image.png") != std::string::npos);
}

TEST_CASE("pyramid: flag validation fires before any work") {
  const std::string out = fx().out("unwritten.dpyr");
  const CmdResult r = run_cli("pyramid " + fx().image + " --features stub "
                              "--levels 0 --out " + out);
  CHECK(r.status == 2);
  CHECK_FALSE(std::filesystem::exists(out));
}

TEST_CASE("pyramid: writes an importable container and reports geometry") {
  const std::string out = fx().out("made.dpyr");
  const CmdResult r = run_cli("pyramid " + fx().image +
                              " --features stub "
                              "--levels 3 --interval 2 --max-dim 64 "
                              "--out " + out);
  CHECK(r.status == 0);
  CHECK(r.output.find("total cells") != std::string::npos);
  CHECK(r.output.find("level 0") != std::string::npos);
  REQUIRE(std::filesystem::exists(out));
  const FeaturePyramid pyr = import_pyramid(out);
  CHECK(pyr.levels.size() == 3);
  CHECK(pyr.levels[0].channels == 31);
}

TEST_CASE("selftest: --cases 1 runs one instance per suite and passes") {
  const CmdResult r = run_cli("selftest --cases 1");
  CHECK(r.status == 0);
  CHECK(r.output.find("1 cases") != std::string::npos);
  CHECK(r.output.find("selftest passed") != std::string::npos);
}

TEST_CASE("selftest: an injected fault fails and names the suite") {
  const CmdResult r =
      run_cli("selftest --cases 40 --inject-fault dt-intersection");
  CHECK(r.status == 1);
  CHECK(r.output.find("dt1d") != std::string::npos);
  CHECK(r.output.find("FAIL") != std::string::npos);
}

TEST_CASE("bench: unknown op is a usage error, known op prints a table") {
  CHECK(run_cli("bench --op warp").status == 2);
  const CmdResult r = run_cli("bench --op conv --sizes 16 --repeat 2");
  CHECK(r.status == 0);
  CHECK(r.output.find("16") != std::string::npos);
}

TEST_CASE("detect: +inf threshold produces an empty document") {
  const std::string out = fx().out("empty.json");
  const CmdResult r = run_cli("detect --model " + fx().model + " --pyramid " +
                              fx().pyramid + " --threshold inf --out " + out);
  CHECK(r.status == 0);
  const auto doc = nlohmann::json::parse(read_file(out));
  CHECK(doc.at("detections").empty());
}

TEST_CASE("detect: feature-spec mismatch reports both sides") {
  const CmdResult r = run_cli("detect --model " + fx().hog_model +
                              " --pyramid " + fx().pyramid + " --out -");
  CHECK(r.status == 2);
  CHECK(r.output.find("channels") != std::string::npos);
  CHECK(r.output.find("31") != std::string::npos);
  CHECK(r.output.find("2") != std::string::npos);
}

TEST_CASE("detect: end-to-end run emits the documented format") {
  const std::string out = fx().out("dets.json");
  const CmdResult r = run_cli("detect --model " + fx().model + " --pyramid " +
                              fx().pyramid + " --threshold -100 --out " + out);
  CHECK(r.status == 0);
  const auto doc = nlohmann::json::parse(read_file(out));
  CHECK(doc.at("format") == "dpyr-detections/1");
  CHECK(doc.at("class_name") == "cli-probe");
  CHECK(doc.at("nms").at("kind") == "iou");
  CHECK_FALSE(doc.at("detections").empty());
  const auto& d0 = doc.at("detections").at(0);
  CHECK(d0.at("box").size() == 4);
  CHECK(d0.contains("score"));
  CHECK(d0.contains("level"));
}

TEST_CASE("detect: environment supplies defaults, flags win over it") {
  const std::string out_env = fx().out("env.json");
  const CmdResult a = run_cli("detect --model " + fx().model + " --pyramid " +
                                  fx().pyramid + " --threshold -100 --out " +
                                  out_env,
                              "DPYR_NMS=legacy-dpm");
  CHECK(a.status == 0);
  CHECK(nlohmann::json::parse(read_file(out_env)).at("nms").at("kind") ==
        "legacy-dpm");

  const std::string out_flag = fx().out("flag.json");
  const CmdResult b = run_cli("detect --model " + fx().model + " --pyramid " +
                                  fx().pyramid + " --threshold -100 --nms iou "
                                  "--out " + out_flag,
                              "DPYR_NMS=legacy-dpm");
  CHECK(b.status == 0);
  CHECK(nlohmann::json::parse(read_file(out_flag)).at("nms").at("kind") ==
        "iou");
}

TEST_CASE("detect: thread hints cannot change the output bytes") {
  const std::string out1 = fx().out("t1.json");
  const std::string out8 = fx().out("t8.json");
  CHECK(run_cli("detect --model " + fx().model + " --pyramid " + fx().pyramid +
                " --threshold -100 --threads 1 --out " + out1).status == 0);
  CHECK(run_cli("detect --model " + fx().model + " --pyramid " + fx().pyramid +
                " --threshold -100 --threads 8 --out " + out8).status == 0);
  CHECK(read_file(out1) == read_file(out8));
}

TEST_CASE("score: dumps per-level score grids as a document") {
  const std::string out = fx().out("scores.json");
  const CmdResult r = run_cli("score --model " + fx().model + " --pyramid " +
                              fx().pyramid + " --out " + out);
  CHECK(r.status == 0);
  const auto doc = nlohmann::json::parse(read_file(out));
  CHECK(doc.at("format") == "dpyr-scores/1");
  CHECK(doc.at("levels").size() == 3);
}
