#include <doctest.h>

#include <fstream>
#include <iterator>
#include <sstream>

#include "apap/cli.hpp"
#include "apap/error.hpp"
#include "apap/matching.hpp"
#include "support.hpp"

using namespace apap;
using apap::test::Gen;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

bool has_line(const std::string& text, const std::string& line) {
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    if (l == line) return true;
  return false;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

/// Two crops of one smooth texture, offset by (12, 5).
void write_pair(const std::filesystem::path& dir) {
  const Image big = test::smooth_noise(260, 200, 31, 2.0);
  save_image(test::render(220, 170, [&](double x, double y) { return big.at(static_cast<int>(x) + 20, static_cast<int>(y) + 20); }),
             dir / "a.png");
  save_image(test::render(220, 170, [&](double x, double y) { return big.at(static_cast<int>(x) + 32, static_cast<int>(y) + 25); }),
             dir / "b.png");
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("default config lines") {
    const std::string text = format_config(RunConfig{});
    for (const char* line : {"sigma = 8", "window = 31", "epsilon = 100", "eta = 0.5", "rho = 15", "omega = 1000",
                             "gamma = 0.01", "composite = seam", "adapt = false"})
      CHECK_MESSAGE(has_line(text, line), line);
  }

  TEST_CASE("property: formatted config reads back unchanged") {
    Gen g(1);
    for (int trial = 0; trial < 20; ++trial) {
      RunConfig cfg;
      cfg.warp.sigma = g.uniform(1, 30);
      cfg.warp.gamma = g.uniform(0, 0.5);
      cfg.search.window = 2 * g.integer(3, 20) + 1;
      cfg.adapt.epsilon = g.uniform(0, 200);
      cfg.adapt.rho = g.uniform(1, 40);
      cfg.seed = static_cast<std::uint64_t>(g.integer(0, 1 << 30));
      cfg.seam = g.coin();
      cfg.run_adapt = g.coin();
      std::istringstream in(format_config(cfg));
      RunConfig back;
      apply_config_text(back, in);
      CHECK(format_config(back) == format_config(cfg));
      CHECK(back.warp.sigma == cfg.warp.sigma);
    }
  }

  TEST_CASE("config text") {
    RunConfig cfg;
    std::istringstream in("# tuned\n\nsigma = 12.5\n  rho=20  \nomega = 500\ncomposite = linear\nadapt = true\n");
    apply_config_text(cfg, in);
    CHECK(cfg.warp.sigma == 12.5);
    CHECK(cfg.adapt.rho == 20.0);
    CHECK(cfg.adapt.omega == 500.0);
    CHECK(cfg.search.accept_omega == 500.0);
    CHECK_FALSE(cfg.seam);
    CHECK(cfg.run_adapt);

    for (const auto& [text, line] : {std::pair{"sigma = 3\nbogus = 1\n", 2}, std::pair{"\n\nsigma 4\n", 3},
                                     std::pair{"window = eleven\n", 1}, std::pair{"a=1\n", 1}}) {
      std::istringstream bad(text);
      RunConfig c;
      try {
        apply_config_text(c, bad);
        FAIL("expected a parse error");
      } catch (const ParseError& e) {
        CHECK(e.line() == line);
      }
    }
  }

  TEST_CASE("set_config_value rejects unknown keys and bad values") {
    RunConfig cfg;
    CHECK_THROWS_AS(set_config_value(cfg, "nope", "1"), UsageError);
    CHECK_THROWS_AS(set_config_value(cfg, "sigma", "abc"), UsageError);
    CHECK_THROWS_AS(set_config_value(cfg, "sigma", "1e999"), UsageError);
    CHECK_THROWS_AS(set_config_value(cfg, "window", "3.5"), UsageError);
    CHECK_THROWS_AS(set_config_value(cfg, "adapt", "maybe"), UsageError);
    cfg.search.window = 30;
    CHECK_THROWS_AS(cfg.validate(), UsageError);
  }

  TEST_CASE("flags override the config file which overrides defaults") {
    const auto dir = test::scratch_dir("cli_precedence");
    write_text(dir / "run.cfg", "sigma = 5\nrho = 20\n");
    const Run r = cli({"stitch", (dir / "x.png").string(), (dir / "y.png").string(), "--config",
                       (dir / "run.cfg").string(), "--sigma", "6"});
    CHECK(r.code == 2);
    CHECK(has_line(r.out, "sigma = 6"));
    CHECK(has_line(r.out, "rho = 20"));
    CHECK(has_line(r.out, "eta = 0.5"));
  }

  TEST_CASE("usage errors exit 1") {
    const Run unknown = cli({"stitch", "a.png", "b.png", "--frobnicate"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("error:") == 0);
    CHECK(unknown.err.find("stitch") != std::string::npos);
    CHECK(cli({}).code == 1);
    CHECK(cli({"warp"}).code == 1);
    CHECK(cli({"stitch", "a.png"}).code == 1);
    CHECK(cli({"stitch", "a.png", "b.png", "--window", "30"}).code == 1);
    CHECK(cli({"stitch", "a.png", "b.png", "--sigma", "wide"}).code == 1);
    CHECK(cli({"stitch", "a.png", "b.png", "--seam", "--linear"}).code == 1);
    CHECK(cli({"diff", "a.png", "b.png", "--out", "o.png"}).code == 1);
  }

  TEST_CASE("help exits 0") {
    const Run r = cli({"stitch", "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--sigma") != std::string::npos);
    CHECK(cli({"--help"}).code == 0);
  }

  TEST_CASE("data errors exit 2") {
    const auto dir = test::scratch_dir("cli_data");
    CHECK(cli({"stitch", (dir / "none.png").string(), (dir / "none2.png").string()}).code == 2);
    write_pair(dir);
    write_text(dir / "bad.csv", "x,y,xp,yp\n1,2,3\n");
    CHECK(cli({"stitch", (dir / "a.png").string(), (dir / "b.png").string(), "--matches", (dir / "bad.csv").string()})
              .code == 2);
    CHECK(cli({"stitch", (dir / "a.png").string(), (dir / "b.png").string(), "--config", (dir / "missing.cfg").string()})
              .code == 2);
  }

  TEST_CASE("degenerate matches exit 3") {
    const auto dir = test::scratch_dir("cli_numerical");
    write_pair(dir);
    write_text(dir / "line.csv", "x,y,xp,yp\n0,0,0,0\n10,10,10,10\n20,20,20,20\n30,30,30,30\n40,40,40,40\n");
    const Run r = cli({"stitch", (dir / "a.png").string(), (dir / "b.png").string(), "--matches",
                       (dir / "line.csv").string(), "--trust-matches", "--out", (dir / "o.png").string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("error:") == 0);
  }

  TEST_CASE("identity stitch reproduces the input") {
    const auto dir = test::scratch_dir("cli_identity");
    const Image img = test::smooth_noise(120, 90, 40, 2.0);
    save_image(img, dir / "a.png");
    save_image(img, dir / "b.png");
    std::string csv = "x,y,xp,yp\n";
    for (const auto [x, y] : {std::pair{10, 10}, {100, 12}, {15, 80}, {110, 85}, {60, 45}, {30, 60}})
      csv += std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(x) + "," + std::to_string(y) + "\n";
    write_text(dir / "m.csv", csv);
    const Run r = cli({"stitch", (dir / "a.png").string(), (dir / "b.png").string(), "--matches",
                       (dir / "m.csv").string(), "--linear", "--out", (dir / "o.png").string()});
    REQUIRE(r.code == 0);
    const Image out = load_image(dir / "o.png");
    REQUIRE(out.width == 120);
    REQUIRE(out.height == 90);
    const Image in = load_image(dir / "a.png");
    for (std::size_t i = 0; i < in.data.size(); ++i) CHECK(std::abs(out.data[i] - in.data[i]) <= 1.0);
  }

  TEST_CASE("stitch with detected matches, then re-ingest the dumped matches") {
    const auto dir = test::scratch_dir("cli_stitch");
    write_pair(dir);
    const std::string a = (dir / "a.png").string(), b = (dir / "b.png").string();
    const Run first = cli({"stitch", a, b, "--adapt", "--out", (dir / "one.png").string(), "--dump-matches",
                           (dir / "m.csv").string(), "--dump-diff", (dir / "diff.png").string(), "--insertion-log",
                           (dir / "log.csv").string()});
    INFO(first.out, first.err);
    REQUIRE(first.code == 0);
    CHECK(std::filesystem::exists(dir / "log.csv"));
    const auto X = read_correspondences(dir / "m.csv");
    CHECK(X.size() >= 8u);
    for (const auto& c : X) CHECK((c.xp - c.x - Vec2(-12, -5)).norm() < 1.0);

    const Image diff = load_image(dir / "diff.png");
    CHECK(diff.width == 220);
    CHECK(diff.height == 170);

    const Run second = cli({"stitch", a, b, "--matches", (dir / "m.csv").string(), "--trust-matches", "--out",
                            (dir / "two.png").string()});
    REQUIRE(second.code == 0);
    CHECK(slurp(dir / "one.png") == slurp(dir / "two.png"));
  }

  TEST_CASE("diff writes the residual in the target frame") {
    const auto dir = test::scratch_dir("cli_diff");
    write_pair(dir);
    std::string csv = "x,y,xp,yp\n";
    for (const auto [x, y] : {std::pair{20, 20}, {180, 25}, {30, 140}, {190, 150}, {100, 80}, {60, 110}})
      csv += std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(x - 12) + "," + std::to_string(y - 5) + "\n";
    write_text(dir / "m.csv", csv);
    const Run r = cli({"diff", (dir / "a.png").string(), (dir / "b.png").string(), "--matches", (dir / "m.csv").string(),
                       "--out", (dir / "r.png").string()});
    REQUIRE(r.code == 0);
    const Image R = load_image(dir / "r.png");
    CHECK(R.width == 220);
    CHECK(R.height == 170);
    for (double v : R.data) CHECK(v == 0.0);
  }

  TEST_CASE("the installed binary reports its usage") {
    const auto dir = test::scratch_dir("cli_binary");
    const std::string cmd = std::string("\"") + APAP_CLI_PATH + "\" bench --help > \"" + (dir / "help.txt").string() + "\"";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(slurp(dir / "help.txt").find("--parallax") != std::string::npos);
    const std::string bad = std::string("\"") + APAP_CLI_PATH + "\" bench --nope 2> \"" + (dir / "err.txt").string() + "\"";
    const int status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(status) == 1);
  }
}
