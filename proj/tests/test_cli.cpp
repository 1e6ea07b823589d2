#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <set>
#include <string>

#include "hyperlearn/cli.hpp"
#include "hyperlearn/config.hpp"
#include "hyperlearn/csv.hpp"
#include "hyperlearn/svg.hpp"
#include "test_util.hpp"

using namespace hyperlearn;

namespace {

std::string small_config_text(std::uint64_t seed) {
    return "# desk-scale run\n"
           "dataset = two_gaussians\n"
           "dataset.n = 120\n"
           "model.hidden = 8,4\n"
           "scheduler = arbiter\n"
           "epochs = 2\n"
           "b0 = 16\n"
           "val_batch = 8\n"
           "seed = " +
           std::to_string(seed) + "\n";
}

std::filesystem::path write_config(const test_util::TempDir& dir, const std::string& text) {
    const auto path = dir.path / "run.cfg";
    std::ofstream out(path);
    out << text;
    return path;
}

RunLog tiny_log() {
    RunLog log;
    for (std::size_t e = 1; e <= 2; ++e) {
        for (std::size_t t = 0; t < 4; ++t) {
            StepRecord s;
            s.epoch = e;
            s.t = t;
            s.train_loss = 0.5 + 0.01 * static_cast<double>(t);
            s.meta_f = 0.6 - 0.001 * static_cast<double>(t);
            s.batch_b = 32;
            s.mixed_s = -1.4388;
            s.candidate_b = 130.0;
            s.eta = 0.1;
            log.steps.push_back(s);
        }
        log.epochs.push_back({e, 0.4, 0.9, 32});
    }
    return log;
}

// distinct vertical levels of the first polyline in an SVG document
std::size_t polyline_levels(const std::string& svg) {
    const auto start = svg.find("points=\"");
    REQUIRE(start != std::string::npos);
    const auto end = svg.find('"', start + 8);
    std::string pts = svg.substr(start + 8, end - start - 8);
    std::set<std::string> ys;
    std::size_t pos = 0;
    while (pos < pts.size()) {
        const auto comma = pts.find(',', pos);
        if (comma == std::string::npos) break;
        auto space = pts.find(' ', comma);
        if (space == std::string::npos) space = pts.size();
        ys.insert(pts.substr(comma + 1, space - comma - 1));
        pos = space + 1;
    }
    return ys.size();
}

}  // namespace

TEST_CASE("presets fill the documented settings") {
    SECTION("stochastic_cifar_like") {
        const ExperimentConfig cfg = parse_config(std::nullopt,
                                                  {{"preset", "stochastic_cifar_like"}});
        CHECK(cfg.meta.eta == 0.1);
        CHECK(cfg.meta.b0 == 128);
        CHECK(cfg.meta.scheduler == SchedulerKind::arbiter);
    }
    SECTION("non_stochastic_cifar_like") {
        const ExperimentConfig cfg = parse_config(std::nullopt,
                                                  {{"preset", "non_stochastic_cifar_like"}});
        CHECK(cfg.meta.eta == 0.01);
        CHECK(cfg.meta.b0 == 400);
        CHECK(cfg.meta.scheduler == SchedulerKind::arbiter);
    }
    SECTION("milestone_hybrid") {
        const ExperimentConfig cfg = parse_config(std::nullopt, {{"preset", "milestone_hybrid"}});
        CHECK(cfg.meta.b0 == 64);
        CHECK(cfg.meta.scheduler == SchedulerKind::hybrid);
        const std::vector<std::pair<std::size_t, std::size_t>> want = {
            {25, 128}, {50, 256}, {100, 512}};
        CHECK(cfg.meta.milestones == want);
    }
    SECTION("hd_co_adapt") {
        const ExperimentConfig cfg = parse_config(std::nullopt, {{"preset", "hd_co_adapt"}});
        CHECK(cfg.meta.beta_hyper == 1e-4);
        CHECK(cfg.meta.eta == 0.1);
        CHECK(cfg.meta.b0 == 128);
        CHECK(cfg.meta.optimizer == OptKind::sgdhd);
        CHECK(cfg.meta.scheduler == SchedulerKind::arbiter_hd);
    }
    SECTION("unknown preset") {
        CHECK_THROWS_AS(parse_config(std::nullopt, {{"preset", "bogus"}}), validation_error);
    }
}

TEST_CASE("config validation names the offending key") {
    test_util::TempDir dir("cfg");

    SECTION("unknown key") {
        const auto path = write_config(dir, "dataset = two_gaussians\nbatchsize = 3\n");
        CHECK_THROWS_WITH(parse_config(path.string()),
                          Catch::Matchers::ContainsSubstring("batchsize"));
    }
    SECTION("unknown scheduler value") {
        const auto path = write_config(dir, "dataset = two_gaussians\nscheduler = bogus\n");
        CHECK_THROWS_WITH(parse_config(path.string()),
                          Catch::Matchers::ContainsSubstring("bogus"));
    }
    SECTION("type mismatch") {
        const auto path = write_config(dir, "dataset = two_gaussians\nepochs = soon\n");
        CHECK_THROWS_WITH(parse_config(path.string()),
                          Catch::Matchers::ContainsSubstring("epochs"));
    }
    SECTION("missing required dataset") {
        const auto path = write_config(dir, "epochs = 3\n");
        CHECK_THROWS_WITH(parse_config(path.string()),
                          Catch::Matchers::ContainsSubstring("dataset"));
    }
    SECTION("malformed line") {
        const auto path = write_config(dir, "dataset two_gaussians\n");
        CHECK_THROWS_AS(parse_config(path.string()), validation_error);
    }
    SECTION("mnist paths required") {
        const auto path = write_config(dir, "dataset = mnist_idx\n");
        CHECK_THROWS_WITH(parse_config(path.string()),
                          Catch::Matchers::ContainsSubstring("dataset.images"));
    }
}

TEST_CASE("overrides beat file keys, file keys beat presets") {
    test_util::TempDir dir("cfgo");
    const auto path = write_config(dir, "preset = stochastic_cifar_like\nb0 = 99\nseed = 5\n");
    const ExperimentConfig cfg = parse_config(path.string(), {{"seed", "7"}});
    CHECK(cfg.meta.b0 == 99);      // file beats preset's 128
    CHECK(cfg.meta.seed == 7);     // override beats file's 5
    CHECK(cfg.meta.eta == 0.1);    // preset fills the rest
}

TEST_CASE("emit_csv writes the documented schema") {
    test_util::TempDir dir("csv");
    SECTION("empty run yields header-only files") {
        emit_csv(RunLog{}, dir.path);
        CHECK(test_util::read_file(dir.path / "steps.csv") == std::string(kStepsHeader) + "\n");
        CHECK(test_util::read_file(dir.path / "epochs.csv") == std::string(kEpochsHeader) + "\n");
    }
    SECTION("two epochs of four steps yield 8 + 2 rows") {
        emit_csv(tiny_log(), dir.path);
        const auto steps = test_util::read_file(dir.path / "steps.csv");
        const auto epochs = test_util::read_file(dir.path / "epochs.csv");
        CHECK(std::count(steps.begin(), steps.end(), '\n') == 9);
        CHECK(std::count(epochs.begin(), epochs.end(), '\n') == 3);
    }
    SECTION("re-emitting is byte-identical") {
        emit_csv(tiny_log(), dir.path);
        const auto first = test_util::read_file(dir.path / "steps.csv");
        emit_csv(tiny_log(), dir.path);
        CHECK(test_util::read_file(dir.path / "steps.csv") == first);
    }
}

TEST_CASE("csv round-trips losslessly through load_run_log") {
    test_util::TempDir dir("csvrt");
    RunLog log = tiny_log();
    log.steps[0].meta_f = std::numeric_limits<double>::quiet_NaN();
    log.steps[0].train_loss = 0.1234567890123456789;
    emit_csv(log, dir.path);
    const auto first_steps = test_util::read_file(dir.path / "steps.csv");
    const auto first_epochs = test_util::read_file(dir.path / "epochs.csv");

    const RunLog loaded = load_run_log(dir.path);
    test_util::TempDir dir2("csvrt2");
    emit_csv(loaded, dir2.path);
    CHECK(test_util::read_file(dir2.path / "steps.csv") == first_steps);
    CHECK(test_util::read_file(dir2.path / "epochs.csv") == first_epochs);
}

TEST_CASE("manifest echo is itself a loadable config") {
    const ExperimentConfig cfg = parse_config(std::nullopt, {{"preset", "milestone_hybrid"},
                                                             {"seed", "11"}});
    test_util::TempDir dir("mani");
    write_manifest(cfg.resolved, dir.path);
    const ExperimentConfig again = parse_config((dir.path / "manifest.txt").string());
    CHECK(again.resolved == cfg.resolved);
}

TEST_CASE("svg output is well-formed and tracks the schedule") {
    test_util::TempDir dir("svg");
    SECTION("constant batch size draws one horizontal level") {
        const auto files = emit_svg(tiny_log(), dir.path);
        REQUIRE(files.size() == 2);
        const auto schedule = test_util::read_file(dir.path / "batch_size.svg");
        CHECK(test_util::xml_well_formed(schedule));
        CHECK(polyline_levels(schedule) == 1);
        const auto losses = test_util::read_file(dir.path / "loss_curves.svg");
        CHECK(test_util::xml_well_formed(losses));
        CHECK(losses.find("train loss") != std::string::npos);
        CHECK(losses.find("val loss") != std::string::npos);
        CHECK(losses.find("meta loss F") != std::string::npos);
    }
    SECTION("milestone jumps appear as distinct levels") {
        RunLog log;
        const std::vector<std::size_t> bs = {10, 20, 20, 40, 40};
        for (std::size_t e = 1; e <= 5; ++e) {
            StepRecord s;
            s.epoch = e;
            s.t = 0;
            s.train_loss = 1.0;
            s.batch_b = bs[e - 1];
            s.eta = 0.1;
            log.steps.push_back(s);
            log.epochs.push_back({e, 0.5, 0.8, bs[e - 1]});
        }
        emit_svg(log, dir.path);
        const auto schedule = test_util::read_file(dir.path / "batch_size.svg");
        CHECK(polyline_levels(schedule) == 3);  // 10, 20, 40
    }
    SECTION("empty log emits nothing") {
        CHECK(emit_svg(RunLog{}, dir.path / "none").empty());
    }
}

TEST_CASE("cli run executes, is deterministic, and replays") {
    test_util::TempDir dir("clirun");
    const auto cfg_path = write_config(dir, small_config_text(3));
    const auto out1 = (dir.path / "out1").string();
    const auto out2 = (dir.path / "out2").string();

    REQUIRE(cli::run({"run", "--config", cfg_path.string(), "--out", out1}) == 0);
    REQUIRE(cli::run({"run", "--config", cfg_path.string(), "--out", out2}) == 0);
    CHECK(std::filesystem::exists(dir.path / "out1" / "manifest.txt"));
    const auto steps1 = test_util::read_file(dir.path / "out1" / "steps.csv");
    CHECK(steps1 == test_util::read_file(dir.path / "out2" / "steps.csv"));
    CHECK(test_util::read_file(dir.path / "out1" / "epochs.csv") ==
          test_util::read_file(dir.path / "out2" / "epochs.csv"));

    // a different seed changes the bytes
    const auto out3 = (dir.path / "out3").string();
    REQUIRE(cli::run({"run", "--config", cfg_path.string(), "--out", out3, "--seed", "4"}) == 0);
    CHECK(steps1 != test_util::read_file(dir.path / "out3" / "steps.csv"));

    // replay re-emits identical bytes from the saved log, including charts
    const auto out1svg = (dir.path / "out1svg").string();
    REQUIRE(cli::run({"run", "--config", cfg_path.string(), "--out", out1svg, "--emit-svg"}) == 0);
    const auto out4 = (dir.path / "out4").string();
    REQUIRE(cli::run({"replay", "--log", out1, "--out", out4, "--emit-svg"}) == 0);
    CHECK(test_util::read_file(dir.path / "out4" / "steps.csv") == steps1);
    CHECK(test_util::read_file(dir.path / "out4" / "loss_curves.svg") ==
          test_util::read_file(dir.path / "out1svg" / "loss_curves.svg"));
    CHECK(test_util::read_file(dir.path / "out4" / "batch_size.svg") ==
          test_util::read_file(dir.path / "out1svg" / "batch_size.svg"));

    // the manifest alone reproduces the run
    const auto out5 = (dir.path / "out5").string();
    REQUIRE(cli::run({"run", "--config", (dir.path / "out1" / "manifest.txt").string(), "--out",
                      out5}) == 0);
    CHECK(test_util::read_file(dir.path / "out5" / "steps.csv") == steps1);
}

TEST_CASE("HYPERLEARN_OUT redirects relative output paths") {
    test_util::TempDir dir("cliroot");
    const auto cfg_path = write_config(dir, small_config_text(5));
    ::setenv("HYPERLEARN_OUT", dir.path.c_str(), 1);
    const int rc = cli::run({"run", "--config", cfg_path.string(), "--out", "nested/run"});
    ::unsetenv("HYPERLEARN_OUT");
    REQUIRE(rc == 0);
    CHECK(std::filesystem::exists(dir.path / "nested" / "run" / "steps.csv"));
}

TEST_CASE("cli exit codes distinguish failure classes") {
    test_util::TempDir dir("clierr");
    SECTION("validation errors exit 1") {
        const auto bad = write_config(dir, "dataset = two_gaussians\nscheduler = bogus\n");
        CHECK(cli::run({"run", "--config", bad.string()}) == 1);
        CHECK(cli::run({"run", "--config", (dir.path / "missing.cfg").string()}) == 3);
        CHECK(cli::run({"bogus-subcommand"}) == 1);
    }
    SECTION("missing dataset files fail validation") {
        const auto cfg = write_config(dir,
                                      "dataset = mnist_idx\n"
                                      "dataset.images = /nonexistent/img\n"
                                      "dataset.labels = /nonexistent/lab\n");
        CHECK(cli::run({"run", "--config", cfg.string()}) == 1);
    }
    SECTION("unreadable dataset content exits 3") {
        const auto img = dir.path / "img";
        const auto lab = dir.path / "lab";
        {
            std::ofstream a(img), b(lab);  // empty files: open ok, headers truncated
        }
        const auto cfg = write_config(dir, "dataset = mnist_idx\n"
                                           "dataset.images = " + img.string() + "\n" +
                                           "dataset.labels = " + lab.string() + "\n");
        CHECK(cli::run({"run", "--config", cfg.string()}) == 3);
    }
    SECTION("numeric explosions exit 2") {
        const auto cfg = write_config(dir,
                                      "dataset = two_gaussians\n"
                                      "dataset.n = 64\n"
                                      "model.hidden = 8,4\n"
                                      "scheduler = constant\n"
                                      "epochs = 3\n"
                                      "b0 = 8\n"
                                      "eta = 1e155\n"
                                      "out = " +
                                          (dir.path / "boom").string() + "\n");
        CHECK(cli::run({"run", "--config", cfg.string()}) == 2);
    }
}

TEST_CASE("grad-check command passes clean and fails when corrupted") {
    CHECK(cli::run({"grad-check"}) == 0);
    CHECK(cli::run({"grad-check", "--inject-sigmoid-fault"}) == 1);
    CHECK(cli::run({"grad-check"}) == 0);  // fault never leaks

    // repeated invocations report identical numbers
    const auto a = gradcheck::run_all(2024);
    const auto b = gradcheck::run_all(2024);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].suite == b[i].suite);
        CHECK(a[i].max_rel_err == b[i].max_rel_err);
        CHECK(a[i].checks == b[i].checks);
    }
}
