#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "oracles.hpp"
#include "voltopo/cylinder.hpp"
#include "voltopo/io_util.hpp"
#include "voltopo/phantom.hpp"
#include "voltopo/refine.hpp"
#include "voltopo/volume_io.hpp"

using namespace voltopo;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path workdir() {
    const auto dir = fs::temp_directory_path() / "voltopo_test_cli";
    fs::create_directories(dir);
    return dir;
}

std::string str(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

TEST_CASE("help lists module defaults") {
    const RefineConfig cfg;
    const Result r = run({"refine", "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--lambda FLOAT [" + str(cfg.lambda) + "]") != std::string::npos);
    CHECK(r.out.find("--steps UINT [" + std::to_string(cfg.steps) + "]") != std::string::npos);
    CHECK(r.out.find("--step-size FLOAT [" + str(cfg.step_size) + "]") != std::string::npos);
    CHECK(r.out.find("--ph-downsample UINT [" + std::to_string(cfg.ph_downsample) + "]") != std::string::npos);
    CHECK(r.out.find("--clamp-eps FLOAT [" + str(cfg.clamp_eps) + "]") != std::string::npos);
    CHECK(r.out.find("--target TEXT [1,0,0]") != std::string::npos);

    const GrowConfig g;
    const Result gr = run({"grow", "--help"});
    CHECK(gr.out.find("--margin-mm FLOAT [" + str(g.margin_mm) + "]") != std::string::npos);
    CHECK(gr.out.find("--hu-lo FLOAT [" + str(g.lo) + "]") != std::string::npos);
    CHECK(gr.out.find("--hu-hi FLOAT [" + str(g.hi) + "]") != std::string::npos);

    const PhantomSpec s;
    const Result ph = run({"phantom", "--help"});
    CHECK(ph.out.find("--radius-mm FLOAT [" + str(s.tube_radius_mm) + "]") != std::string::npos);
    CHECK(ph.out.find("--noise FLOAT [" + str(s.noise_sigma) + "]") != std::string::npos);
    CHECK(ph.out.find("--seed UINT [" + std::to_string(s.seed) + "]") != std::string::npos);

    for (const char* cmd : {"phantom", "barcode", "betti", "betti-curve", "loss", "refine", "cylinder", "grow",
                            "metrics", "ttest"}) {
        CAPTURE(cmd);
        CHECK(run({cmd, "--help"}).code == 0);
    }
}

TEST_CASE("exit codes") {
    const auto dir = workdir();
    const Result none = run({});
    CHECK(none.code == 1);
    CHECK(none.err.find('\n') == none.err.size() - 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"betti"}).code == 1);
    CHECK(run({"betti", "--in", "x.svol", "--p", "abc"}).code == 1);
    CHECK(run({"betti", "--in", (dir / "missing.svol").string()}).code == 2);
    CHECK(run({"ttest", "--x", "1,2", "--y", "1,2,3"}).code == 1);
    CHECK(run({"ttest", "--x", "1,2,3", "--y", "1,2,3"}).code == 2);
    CHECK(run({"refine", "--in", "a", "--out", "b", "--lambda", "-1"}).code == 1);

    write_file_atomic(dir / "garbage.svol", "not a volume");
    CHECK(run({"barcode", "--in", (dir / "garbage.svol").string()}).code == 2);
    write_volume(ScalarVolume({2, 2, 2}, {}, 3.0), dir / "big.svol");
    CHECK(run({"barcode", "--in", (dir / "big.svol").string()}).code == 1);
}

TEST_CASE("phantom, barcode and betti pipeline") {
    const auto dir = workdir() / "ring";
    const Result g = run({"phantom", "--kind", "closed_ring", "--out-dir", dir.string(), "--dims", "32,32,24",
                          "--radius-mm", "3", "--seed", "3"});
    REQUIRE(g.code == 0);
    for (const char* f : {"intensity.svol", "gt.svol", "prob.svol", "path.json"}) CHECK(fs::exists(dir / f));
    CHECK_FALSE(fs::exists(dir / "gt.svol.tmp"));

    const Result b = run({"barcode", "--in", (dir / "gt.svol").string(), "--out", (dir / "bars.csv").string()});
    REQUIRE(b.code == 0);
    std::istringstream rows(read_file(dir / "bars.csv"));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(rows, line)) lines.push_back(line);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "dim,birth,death,birth_voxel,death_voxel");
    CHECK(lines[1].rfind("0,1,0,", 0) == 0);
    CHECK(lines[2].rfind("1,1,0,", 0) == 0);

    CHECK(run({"betti", "--in", (dir / "gt.svol").string(), "--p", "0.5"}).out == "1,1,0\n");

    const Result curve = run({"betti-curve", "--in", (dir / "gt.svol").string(), "--samples", "3"});
    CHECK(curve.out == "p,b0,b1,b2\n0,1,0,0\n0.5,1,1,0\n1,1,1,0\n");

    const Result loss = run({"loss", "--in", (dir / "gt.svol").string(), "--target", "1,1,0"});
    CHECK(loss.out == "total,dim0,dim1,dim2\n0,0,0,0\n");
    const Result loss2 = run({"loss", "--in", (dir / "gt.svol").string()});
    CHECK(loss2.out == "total,dim0,dim1,dim2\n1,0,1,0\n");
}

TEST_CASE("cylinder, grow and metrics commands") {
    const auto dir = workdir() / "tube";
    REQUIRE(run({"phantom", "--out-dir", dir.string(), "--dims", "24,24,24", "--radius-mm", "3"}).code == 0);
    const std::string path = (dir / "path.json").string();
    REQUIRE(run({"cylinder", "--path", path, "--ref", (dir / "gt.svol").string(), "--out",
                 (dir / "inner.svol").string()})
                .code == 0);
    const Path3D p = path_from_json(read_file(path));
    const BinaryVolume inner = read_binary_volume(dir / "inner.svol");
    CHECK(inner == rasterize_tube(p, 1.5, {24, 24, 24}, {}));
    REQUIRE(run({"cylinder", "--path", path, "--dims", "24,24,24", "--radius-mm", "3", "--out",
                 (dir / "full.svol").string()})
                .code == 0);
    CHECK(read_binary_volume(dir / "full.svol") == read_binary_volume(dir / "gt.svol"));
    CHECK(run({"cylinder", "--path", path, "--out", (dir / "x.svol").string()}).code == 1);

    REQUIRE(run({"grow", "--path", path, "--intensity", (dir / "intensity.svol").string(), "--out",
                 (dir / "grown.svol").string()})
                .code == 0);
    CHECK(read_binary_volume(dir / "grown.svol") == read_binary_volume(dir / "gt.svol"));

    const std::string gt = (dir / "gt.svol").string();
    CHECK(run({"metrics", "--pred", gt, "--ref", gt, "--case", "self"}).out ==
          "case,dice,hd,hd95,asd\nself,1,0,0,0\n");
    CHECK(run({"metrics", "--pred", (dir / "inner.svol").string(), "--ref", gt}).code == 0);
}

TEST_CASE("ttest command") {
    const Result r = run({"ttest", "--x", "2,3,4,1", "--y", "1,2,2,1"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("t,p_value,df\n2.449489742783", 0) == 0);
    CHECK(r.out.substr(r.out.size() - 3) == ",3\n");
}

TEST_CASE("refine command writes volume and trace") {
    const auto dir = workdir() / "refine";
    fs::create_directories(dir);
    std::mt19937_64 rng(9);
    write_volume(oracle::distinct_volume(rng, {6, 6, 6}), dir / "in.svol");
    const Result r = run({"refine", "--in", (dir / "in.svol").string(), "--out", (dir / "out.svol").string(),
                          "--trace", (dir / "trace.csv").string(), "--steps", "3"});
    REQUIRE(r.code == 0);
    const std::string trace = read_file(dir / "trace.csv");
    CHECK(trace.rfind("iter,proximity,topo,total,b0,b1,b2\n0,", 0) == 0);
    CHECK(std::count(trace.begin(), trace.end(), '\n') == 5);
    CHECK(read_scalar_volume(dir / "out.svol").dims() == Dims{6, 6, 6});
}
