#include "depthlab/cli.hpp"

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace depthlab;
namespace fs = std::filesystem;

namespace
{

struct Outcome
{
	int code;
	std::string out;
	std::string err;
};

Outcome run(std::vector<std::string> args)
{
	std::ostringstream out, err;
	int const code = run_cli(args, out, err);
	return {code, out.str(), err.str()};
}

fs::path scratch_dir()
{
	static fs::path const dir = [] {
		fs::path p = fs::temp_directory_path() / ("depthlab_cli_test_" + std::to_string(::getpid()));
		fs::create_directories(p);
		return p;
	}();
	return dir;
}

std::string write_file(const std::string &name, const std::string &body)
{
	fs::path const p = scratch_dir() / name;
	std::ofstream(p, std::ios::binary) << body;
	return p.string();
}

std::string read_file(const fs::path &p)
{
	std::ifstream in(p, std::ios::binary);
	std::ostringstream os;
	os << in.rdbuf();
	return os.str();
}

std::string source_dir()
{
	const char *s = std::getenv("DEPTHLAB_SOURCE");
	return s ? s : DEPTHLAB_TEST_SOURCE_DIR;
}

}  // namespace

TEST_CASE("depth subcommand")
{
	CHECK(run({"depth", "--model", "cauchy:d=2", "--point", "0,0"}).out == "0.5\n");
	CHECK(run({"depth", "--model", "cauchy:d=2", "--point", "1,1"}).out == "0.25\n");
	Outcome const q = run({"depth", "--model", "gaussian:d=3", "--point", "0.674489750196,0,0"});
	CHECK(q.code == 0);
	CHECK(std::abs(std::stod(q.out) - 0.25) < 1e-12);

	std::string const pts = write_file("pts.csv", "0,0\n1,0\n0,1\n-1,-1\n2,3\n");
	CHECK(run({"depth", "--data", pts, "--point", "9e9,9e9", "--method", "exact2d"}).out == "0\n");
	CHECK(run({"depth", "--data", pts, "--point", "0,0"}).out == "0.4\n");
	CHECK(run({"depth", "--data", pts, "--point", "0,0", "--method", "approx", "--dirs", "64", "--seed", "3"}).code == 0);

	std::string const bad = write_file("bad.csv", "1,2\n3,oops\n");
	Outcome const b = run({"depth", "--data", bad, "--point", "0,0"});
	CHECK(b.code == 1);
	CHECK(b.err.find("row 2 column 2") != std::string::npos);
	std::string const ragged = write_file("ragged.csv", "1,2\n3\n");
	CHECK(run({"depth", "--data", ragged, "--point", "0,0"}).code == 1);

	CHECK(run({"depth", "--point", "0,0"}).code == 1);
	CHECK(run({"depth", "--model", "cauchy:d=2", "--data", pts, "--point", "0,0"}).code == 1);
	CHECK(run({"depth", "--model", "cauchy:d=2", "--point", "0,0,0"}).code == 1);
	CHECK(run({"depth", "--model", "cauchy:d=2", "--point", "0,0", "--bogus"}).code == 1);
	CHECK(run({"depth", "--data", pts, "--point", "0,0", "--method", "exact1d"}).code == 1);
}

TEST_CASE("median subcommand")
{
	std::string const uni = write_file("uni.csv", "1\n2\n5\n");
	Outcome const u = run({"median", "--data", uni});
	CHECK(u.code == 0);
	CHECK(u.out.find("point: 2\n") != std::string::npos);
	CHECK(u.out.find("depth: 0.666666666667") != std::string::npos);

	std::string const cross = write_file("cross.csv", "1,0\n-1,0\n0,1\n0,-1\n");
	Outcome const c = run({"median", "--data", cross});
	CHECK(c.out.find("point: 0,0\n") != std::string::npos);
	CHECK(c.out.find("depth: 0.5") != std::string::npos);

	Outcome const s = run({"median", "--data", cross, "--kind", "scatter:standard", "--mode", "isotropic"});
	CHECK(s.code == 0);
	CHECK(s.out.find("sigma: ") != std::string::npos);
	CHECK(s.out.find("matrix:\n") != std::string::npos);

	CHECK(run({"median", "--data", cross, "--kind", "scatter:standard"}).code == 1);
	CHECK(run({"median", "--data", cross, "--kind", "scatter:alpha=1", "--mode", "diagonal"}).code == 0);
	std::string const two = write_file("two.csv", "1,0,0\n0,1,0\n");
	Outcome const f = run({"median", "--data", two, "--kind", "scatter:standard", "--mode", "full"});
	CHECK(f.code == 1);
	CHECK(f.err.find("n >= d + 1") != std::string::npos);
	CHECK(run({"median", "--data", cross, "--kind", "spread"}).code == 1);
	CHECK(run({"median", "--data", cross, "--mode", "full"}).code == 1);

	// Seeded runs repeat exactly.
	std::ostringstream big;
	for (int i = 0; i < 600; ++i)
		big << std::sin(1.3 * i) << ',' << std::cos(0.7 * i * i) << ',' << std::sin(0.11 * i * i) << '\n';
	std::string const b = write_file("big.csv", big.str());
	Outcome const r1 = run({"median", "--data", b, "--seed", "4", "--dirs", "64"});
	Outcome const r2 = run({"median", "--data", b, "--seed", "4", "--dirs", "64"});
	CHECK(r1.code == 0);
	CHECK(r1.out == r2.out);
}

TEST_CASE("solve-sigma subcommand")
{
	CHECK(run({"solve-sigma", "--model", "cauchy:d=4", "--depth", "standard"}).out == "1.414213562373\n");
	CHECK(run({"solve-sigma", "--model", "cauchy:d=2", "--depth", "alpha"}).out == "1.000000000000\n");
	CHECK(run({"solve-sigma", "--model", "gaussian:d=7", "--depth", "standard"}).out == "0.674489750196\n");
	CHECK(run({"solve-sigma", "--model", "gaussian:d=7", "--depth", "robust"}).code == 1);
	CHECK(run({"solve-sigma", "--model", "gaussian:d=1"}).code == 1);

	std::string const model = write_file("model.toml", "family = \"cauchy\"\ndim = 9\n");
	Outcome const t = run({"solve-sigma", "--model", model});
	CHECK(t.code == 0);
	CHECK(std::abs(std::stod(t.out) - std::sqrt(3.0)) < 1e-11);
}

TEST_CASE("certify subcommand")
{
	Outcome const ok = run({"certify", "--model", "cauchy:d=2", "--variant", "A2", "--gamma", "1", "--kappa", "0.079", "--epsilon", "0.05"});
	CHECK(ok.code == 0);
	CHECK(ok.out.find("holds: true") != std::string::npos);
	CHECK(ok.out.find("witnessed_inf: 0.25") != std::string::npos);

	Outcome const no = run({"certify", "--model", "cauchy:d=2", "--variant", "A2", "--gamma", "1", "--kappa", "0.26"});
	CHECK(no.code == 0);
	CHECK(no.out.find("holds: false") != std::string::npos);
	CHECK(no.out.find("reason: infimum<kappa") != std::string::npos);

	Outcome const range = run({"certify", "--model", "gaussian:d=2", "--variant", "A2", "--gamma", "2", "--kappa", "0.3"});
	CHECK(range.code == 0);
	CHECK(range.out.find("range_ok: false") != std::string::npos);
	CHECK(range.out.find("reason: range:") != std::string::npos);

	CHECK(run({"certify", "--model", "gaussian:d=2", "--variant", "A4", "--gamma", "0.1", "--kappa", "0.3"}).code == 1);
	Outcome const a4 = run({"certify", "--model", "gaussian:d=2", "--variant", "A4", "--gamma", "0.1", "--kappa", "0.3", "--sigma", "0.6745"});
	CHECK(a4.out.find("holds: true") != std::string::npos);
	CHECK(run({"certify", "--model", "gaussian:d=2", "--variant", "A7", "--gamma", "1", "--kappa", "0.3"}).code == 1);
}

TEST_CASE("experiment subcommand")
{
	std::string const cfg = source_dir() + "/configs/location_rate_small.toml";
	fs::path const out1 = scratch_dir() / "exp1";
	fs::path const out2 = scratch_dir() / "exp2";
	Outcome const a = run({"experiment", "--config", cfg, "--out", out1.string()});
	CHECK(a.code == 0);
	CHECK(a.out.find("FAIL") == std::string::npos);
	CHECK(a.out.find("coverage") != std::string::npos);
	Outcome const b = run({"experiment", "--config", cfg, "--out", out2.string()});
	CHECK(b.code == 0);
	std::string const csv = read_file(out1 / "report.csv");
	CHECK(!csv.empty());
	CHECK(csv == read_file(out2 / "report.csv"));
	CHECK(read_file(out1 / "report.json").find("\"version\"") != std::string::npos);

	std::string const small_n = write_file("small_n.toml", "experiment = \"maxdepth_coverage\"\nn = [10]\n");
	Outcome const e = run({"experiment", "--config", small_n, "--out", (scratch_dir() / "exp3").string()});
	CHECK(e.code == 1);
	CHECK(e.err.find("minimal admissible n is 14") != std::string::npos);

	std::string const uncert = write_file("uncert.toml", "experiment = \"location_rate\"\nn = [200]\nreplications = 2\n");
	Outcome const u = run({"experiment", "--config", uncert, "--out", (scratch_dir() / "exp4").string()});
	CHECK(u.code == 1);
	CHECK_FALSE(fs::exists(scratch_dir() / "exp4" / "report.csv"));

	CHECK(run({"experiment", "--config", "/nonexistent.toml", "--out", out1.string()}).code == 1);
}

TEST_CASE("help, unknown flags and the binary")
{
	for (const char *sub : {"depth", "median", "solve-sigma", "certify", "experiment"}) {
		Outcome const h = run({sub, "--help"});
		CHECK(h.code == 0);
		CHECK(h.out.find("--") != std::string::npos);
	}
	Outcome const dh = run({"depth", "--help"});
	for (const char *flag : {"--model", "--data", "--point", "--method", "--dirs", "--seed"})
		CHECK(dh.out.find(flag) != std::string::npos);
	Outcome const ch = run({"certify", "--help"});
	for (const char *flag : {"--model", "--variant", "--gamma", "--kappa", "--epsilon", "--sigma"})
		CHECK(ch.out.find(flag) != std::string::npos);
	CHECK(run({}).code == 1);
	CHECK(run({"frobnicate"}).code == 1);
	CHECK(run({"solve-sigma", "--model", "cauchy:d=4", "--verbose-ish"}).code == 1);

	const char *bin = std::getenv("DEPTHLAB_CLI");
	REQUIRE(bin != nullptr);
	auto status = [&](const std::string &args) {
		int const raw = std::system((std::string(bin) + " " + args + " > /dev/null 2>&1").c_str());
		return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
	};
	CHECK(status("depth --model cauchy:d=2 --point 0,0") == 0);
	CHECK(status("depth --model cauchy:d=2 --point 0,zero") == 1);
	CHECK(status("--nope") == 1);
	CHECK(status("--help") == 0);
}
