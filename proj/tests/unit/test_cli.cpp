#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ltr/cli/cli.hpp"

namespace fs = std::filesystem;
using ltr::cli::run;

namespace {

const std::string kData = std::string(LTR_SOURCE_DIR) + "/tests/data/cli";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string out, err;
};

Run call(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("ltr_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string query(const std::string& name) { return kData + "/queries/" + name + ".json"; }

}  // namespace

TEST_CASE("cli verify exit codes follow the verdict") {
    auto r = call({"verify", "--query", query("q1_identity")});
    CHECK(r.code == ltr::cli::kRobust);
    CHECK(r.out.rfind("Robust", 0) == 0);

    r = call({"verify", "--query", query("q2_shift")});
    CHECK(r.code == ltr::cli::kNotRobust);
    CHECK(r.out.find("replay: confirmed") != std::string::npos);

    r = call({"verify", "--network", kData + "/net.json", "--image", kData + "/centre.pgm", "--normalize",
              "--translate", "0,0,0,0"});
    CHECK(r.code == ltr::cli::kRobust);
}

TEST_CASE("cli error classes") {
    CHECK(call({}).code == ltr::cli::kUsage);
    CHECK(call({"verify"}).code == ltr::cli::kUsage);
    CHECK(call({"verify", "--query", query("q1_identity"), "--bogus"}).code == ltr::cli::kUsage);
    CHECK(call({"verify", "--query", kData + "/missing.json"}).code == ltr::cli::kIo);
    CHECK(call({"verify", "--network", kData + "/net.json", "--image", kData + "/centre.pgm", "--translate",
                "0,0,0"})
              .code == ltr::cli::kIo);
    // shift of 3 does not fit a 3x3 image
    CHECK(call({"verify", "--network", kData + "/net.json", "--image", kData + "/centre.pgm", "--translate",
                "-3,3,0,0"})
              .code == ltr::cli::kInvalid);
}

TEST_CASE("cli verify and falsify agree on the canned queries") {
    for (auto name : {"q1_identity", "q2_shift", "q3_subsample", "q4_zoom"}) {
        CAPTURE(name);
        auto v = call({"verify", "--query", query(name)});
        auto f = call({"falsify", "--query", query(name)});
        CHECK(v.code == f.code);
    }
}

TEST_CASE("cli encode matches the golden LP") {
    auto dir = scratch("encode");
    auto out = dir / "q2.lp";
    auto r = call({"encode", "--query", query("q2_shift"), "--out", out.string()});
    REQUIRE(r.code == 0);
    CHECK(slurp(out) == slurp(fs::path(LTR_GOLDEN_DIR) / "q2_shift.lp"));
}

TEST_CASE("cli batch reports one row per domain") {
    auto dir = scratch("batch");
    auto report = dir / "report.tsv";
    auto r = call({"batch", "--queries", kData + "/queries", "--report", report.string(), "--outcomes",
                   (dir / "outcomes").string(), "--jobs", "2"});
    REQUIRE(r.code == 0);
    std::istringstream in(slurp(report));
    std::vector<std::string> rows;
    for (std::string line; std::getline(in, line);) rows.push_back(line);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == "domain\tverified\tmean_s\tltr");
    const std::vector<std::pair<std::string, std::string>> expect = {
        {"translation[0,0]x[0,0]", "1"}, {"translation[-1,1]x[-1,1]", "0"}, {"subsample[2,3]", "0"},
        {"zoom[2,3]", "1"}, {"photometric[0.9,1.1]x[0,0.05]+rho0.01", "1"}};
    for (std::size_t i = 0; i < expect.size(); ++i) {
        CAPTURE(rows[i + 1]);
        CHECK(rows[i + 1].rfind(expect[i].first + "\t1\t", 0) == 0);
        CHECK(rows[i + 1].substr(rows[i + 1].rfind('\t') + 1) == expect[i].second);
    }

    auto adv = dir / "adv";
    r = call({"augment", "--outcomes", (dir / "outcomes").string(), "--out", adv.string()});
    REQUIRE(r.code == 0);
    std::istringstream manifest(slurp(adv / "manifest.tsv"));
    int lines = 0;
    for (std::string line; std::getline(manifest, line);) ++lines;
    CHECK(lines == 2);
}

TEST_CASE("cli transform writes the shifted image") {
    auto dir = scratch("transform");
    auto out = dir / "t.pgm";
    auto r = call({"transform", "--image", kData + "/centre.pgm", "--translate", "1,0", "--out", out.string(),
                   "--ascii"});
    REQUIRE(r.code == 0);
    // out(u,v) = in(u+1,v): the bright pixel moves up a row
    CHECK(slurp(out) == "P2\n3 3\n255\n0 200 0\n0 0 0\n0 0 0\n");
}
