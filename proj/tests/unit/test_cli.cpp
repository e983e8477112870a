#include "adaptfolio/ingest.hpp"

#include "synthetic.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const fs::path& out_file = "/dev/null") {
    const std::string cmd = std::string("\"") + ADAPTFOLIO_CLI + "\" " + args + " > \"" + out_file.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_text(const fs::path& frame, const adaptfolio::TimeSeriesFrame& f) {
    const auto& cal = f.calendar();
    return "[data]\nframe = " + frame.string() +
           "\n[model]\nhorizons = 1\nwindows = 22\nmax_lag = 1\ncurves = vix\n"
           "[loss]\nfamilies = single\nlambdas = 1\npowers = 2\nv = 20\nv0 = 10\nv1 = 10\n"
           "[run]\nassets = spx\nmethods = dms, fixed\nvalidation_start = " +
           cal[80].iso() + "\nvalidation_end = " + cal[150].iso() + "\ntest_start = " + cal[151].iso() +
           "\ntest_end = " + cal[cal.size() - 1].iso() + "\n[output]\ndir = out\n";
}

} // namespace

TEST_CASE("command line exit codes") {
    const auto dir = testsupport::fresh_dir("cli");
    testsupport::MarketOptions opt;
    opt.days = 260;
    const auto frame = testsupport::synthetic_market(opt);
    adaptfolio::ingest::write_frame_csv(frame, dir / "frame.csv");
    std::ofstream(dir / "run.ini") << config_text(dir / "frame.csv", frame);

    CHECK(run("") == 2);
    CHECK(run("--help") == 0);
    CHECK(run("backtest") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("backtest --config \"" + (dir / "missing.ini").string() + "\"") == 2);

    std::ofstream(dir / "bad.ini") << "[model]\nhorizons = many\n";
    CHECK(run("backtest --config \"" + (dir / "bad.ini").string() + "\"") == 2);

    std::ofstream(dir / "nodata.ini") << config_text(dir / "absent.csv", frame);
    CHECK(run("backtest --config \"" + (dir / "nodata.ini").string() + "\"") == 3);

    std::ofstream(dir / "broken.csv") << "date,spx\n2012-01-02,abc\n";
    std::ofstream(dir / "broken.ini") << config_text(dir / "broken.csv", frame);
    CHECK(run("backtest --config \"" + (dir / "broken.ini").string() + "\"") == 3);

    REQUIRE(run("backtest --config \"" + (dir / "run.ini").string() + "\"") == 0);
    const auto manifest = dir / "out" / "backtest" / "manifest.json";
    REQUIRE(fs::exists(manifest));

    CHECK(run("report --run \"" + manifest.string() + "\" --format csv", dir / "report.csv") == 0);
    const auto report = testsupport::read_file(dir / "report.csv");
    CHECK(report.rfind("strategy,sr,anr,mdd,n_days,first_date,last_date\n", 0) == 0);
    CHECK(report.find("portfolio/dms,") != std::string::npos);
    CHECK(run("report --run \"" + manifest.string() + "\" --format json", dir / "report.json") == 0);
    CHECK(testsupport::read_file(dir / "report.json").find("\"portfolio/dms\"") != std::string::npos);
    CHECK(run("report --run \"" + manifest.string() + "\" --format xml") == 2);

    std::ofstream(dir / "out" / "backtest" / "strategies" / "spx_k1_dms.csv", std::ios::app) << "tampered\n";
    CHECK(run("report --run \"" + manifest.string() + "\"") == 3);
    CHECK(run("report --run \"" + (dir / "nothing.json").string() + "\"") == 3);

    CHECK(run("daa --config \"" + (dir / "run.ini").string() + "\" --cap capped") == 2);
}

TEST_CASE("ingest writes an aligned frame") {
    const auto dir = testsupport::fresh_dir("cli-ingest");
    std::ofstream(dir / "spx.csv") << "date,close\n2020-01-02,100\n2020-01-03,101\n2020-01-06,102\n";
    std::ofstream(dir / "ndx.csv") << "date,close\n2020-01-03,50\n2020-01-06,51\n2020-01-07,52\n";
    REQUIRE(run("ingest --prices \"" + (dir / "spx.csv").string() + "\" --prices \"ndx=" + (dir / "ndx.csv").string() +
                "\" --out \"" + (dir / "frame.csv").string() + "\"") == 0);
    const auto frame = adaptfolio::ingest::load_csv(dir / "frame.csv", {});
    CHECK(frame.rows() == 2);
    CHECK(frame.has_column("spx"));
    CHECK(frame.has_column("ndx"));
    std::ofstream(dir / "dup.csv") << "date,close\n2020-01-02,100\n2020-01-02,101\n";
    CHECK(run("ingest --prices \"" + (dir / "dup.csv").string() + "\" --out \"" + (dir / "f2.csv").string() + "\"") == 3);
}
