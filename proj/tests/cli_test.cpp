#include "kcontact/model.hpp"
#include "kcontact/parser.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sys/wait.h>

using namespace kcontact;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args)
{
    const std::string cmd = std::string(KCONTACT_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) r.out += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string model(const std::string& name)
{
    return std::string(KCONTACT_MODELS) + "/" + name;
}

class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("kcontact_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++)))
    {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    std::string write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path_ / name) << text;
        return (path_ / name).string();
    }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

const char* kMinimal = "model tiny\nbase_dim 1\nfield_dim 2\ncoords q\nparams rho=1\nlagrangian 1/2*rho*v[q,1]^2 - 1/2*v[q,2]^2\n";

}  // namespace

TEST(Cli, DeriveString)
{
    const auto r = run("derive " + model("damped_string.kc"));
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("w[q,1,1]*rho - w[q,2,2]*tau + a[q,1]*gamma*rho"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("regularity: regular"), std::string::npos);
}

TEST(Cli, DeriveTelegrapher)
{
    const auto r = run("--format json derive " + model("telegrapher.kc"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = json::parse(r.out);
    const auto m = load_model(model("telegrapher.kc"));
    const auto el = parse(j["euler_lagrange"]["field"][0].get<std::string>(), *m.chart);
    // q_tt - c^2 q_xx + gamma q_t + m^2 q with the line constants
    const auto expected = parse("w[q,1,1] - 1/(L*C)*w[q,2,2] + (L*G + R*C)/(L*C)*a[q,1] + R*G/(L*C)*q", *m.chart);
    EXPECT_TRUE(is_zero_like(is_zero(el - expected)));
}

TEST(Cli, DeriveAffineIsSingular)
{
    const auto r = run("derive " + model("affine.kc"));
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("regularity: singular"), std::string::npos) << r.out;
}

TEST(Cli, DeriveRoundTrip)
{
    for (const char* name : {"damped_string.kc", "telegrapher.kc", "coupled_strings.kc", "damped_laplace.kc", "affine.kc"}) {
        const auto r = run("--format json derive " + model(name));
        ASSERT_EQ(r.code, 0) << name << r.out;
        const auto j = json::parse(r.out);
        const auto m = load_model(model(name));
        auto same = [&](const std::string& text, const Expression& e) { EXPECT_EQ(parse(text, *m.chart), e) << name << " " << text; };
        same(j["energy"], energy(*m.lagrangian));
        same(j["lagrangian"], m.lagrangian->value());
        const auto el = euler_lagrange_residuals(*m.lagrangian);
        for (std::size_t i = 0; i < el.field.size(); ++i) same(j["euler_lagrange"]["field"][i], el.field[i]);
        same(j["euler_lagrange"]["divergence"], el.divergence);
        const auto h = hessian(*m.lagrangian);
        for (int a = 0; a < h.size(); ++a) {
            for (int b = 0; b < h.size(); ++b) same(j["hessian"][a][b], h(a, b));
        }
    }
}

TEST(Cli, SymmetryCheck)
{
    const auto r = run("check " + model("damped_string.kc") + " --symmetry dq");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("law: F = (v[q,1]*rho, -v[q,2]*tau)"), std::string::npos) << r.out;
    EXPECT_EQ(run("check " + model("damped_string.kc") + " --symmetry shift_t").code, 1);
    EXPECT_EQ(run("check " + model("damped_string.kc") + " --symmetry scale").code, 1);
}

TEST(Cli, NewtonoidCartanCorollary)
{
    EXPECT_EQ(run("check " + model("damped_string.kc") + " --newtonoid lift_k --sopde fixture").code, 0);
    EXPECT_EQ(run("check " + model("damped_string.kc") + " --newtonoid translation --sopde fixture").code, 0);
    EXPECT_EQ(run("check " + model("damped_string.kc") + " --cartan cartan --g '1; 0'").code, 0);
    EXPECT_EQ(run("check " + model("damped_string.kc") + " --cartan cartan --g '1; q'").code, 1);
    EXPECT_EQ(run("check " + model("damped_string.kc") + " --cartan cartan --g '2; 0'").code, 1);
    EXPECT_EQ(run("check " + model("damped_string.kc") + " --corollary dq --k 0,1").code, 0);
    EXPECT_EQ(run("check " + model("damped_string.kc") + " --corollary dq --k 1,1").code, 1);
    EXPECT_EQ(run("check " + model("coupled_strings.kc") + " --symmetry rotation").code, 0);
}

TEST(Cli, CheckJson)
{
    const auto r = run("--format json check " + model("damped_string.kc") + " --symmetry dq");
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["result"], "pass");
    ASSERT_EQ(j["verdicts"].size(), 2u);
    EXPECT_EQ(j["verdicts"][1]["class"], "k-contact");
    EXPECT_EQ(j["verdicts"][1]["conditions"].size(), 11u);
    EXPECT_EQ(j["verdicts"][1]["law"][0], "v[q,1]*rho");
}

TEST(Cli, Probe)
{
    EXPECT_EQ(run("--threads 2 check " + model("damped_string.kc") + " --probe translation --sopde fixture --nodes 51").code, 0);
    EXPECT_EQ(run("check " + model("damped_string.kc") + " --probe scaling --nodes 51 --epsilon 1e-2").code, 1);
}

TEST(Cli, MalformedInput)
{
    TempDir dir;
    const auto bad_field = dir.write("bad_field.kc", std::string(kMinimal) + "vectorfield oops q = (1 +\n");
    const auto r = run("check " + bad_field + " --symmetry oops");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("line 7"), std::string::npos) << r.out;
    const auto bad_coord = dir.write("bad_coord.kc", std::string(kMinimal) + "vectorfield oops p = 1\n");
    EXPECT_EQ(run("check " + bad_coord + " --symmetry oops").code, 2);
    const auto undeclared = dir.write("undeclared.kc", std::string(kMinimal) + "law F v[q,1]*mu; 0\n");
    const auto u = run("verify " + undeclared + " --law F");
    EXPECT_EQ(u.code, 2);
    EXPECT_NE(u.out.find("mu"), std::string::npos) << u.out;
    EXPECT_EQ(run("derive /nonexistent/model.kc").code, 2);
    EXPECT_EQ(run("check " + model("damped_string.kc")).code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("--format yaml derive " + model("damped_string.kc")).code, 2);
}

TEST(Cli, VerifySymbolic)
{
    EXPECT_EQ(run("verify " + model("damped_string.kc") + " --law F1").code, 0);
    EXPECT_EQ(run("verify " + model("damped_string.kc") + " --law F2").code, 0);
    EXPECT_EQ(run("verify " + model("damped_string.kc") + " --law broken").code, 1);
    EXPECT_EQ(run("verify " + model("damped_string.kc") + " --law corollary_k11").code, 1);
    const auto a = run("--format json --seed 5 verify " + model("damped_string.kc") + " --law broken");
    const auto b = run("--format json --seed 5 verify " + model("damped_string.kc") + " --law broken");
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, run("--format json --seed 6 verify " + model("damped_string.kc") + " --law broken").out);
}

TEST(Cli, VerifyNumeric)
{
    const auto r = run("--format json verify " + model("damped_string.kc") + " --law F2 --mode numeric");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto j = json::parse(r.out);
    EXPECT_GE(j["order"].get<double>(), 1.7);
    EXPECT_EQ(j["levels"].size(), 3u);
    const auto text = run("verify " + model("damped_string.kc") + " --law F1 --mode numeric");
    EXPECT_EQ(text.code, 0);
    EXPECT_NE(text.out.find("order: "), std::string::npos);
    EXPECT_EQ(run("verify " + model("damped_string.kc") + " --law broken --mode numeric --constant 16").code, 1);
    EXPECT_EQ(run("verify " + model("damped_string.kc") + " --law broken --mode numeric").code, 2);
}

TEST(Cli, SimulateString)
{
    TempDir dir;
    const auto r = run("--out " + dir.path().string() + " simulate " + model("damped_string.kc") +
                       " --preset damped-string --nx 101 --nt 200 --gamma 0.1");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("EL residual field[1]: linf "), std::string::npos);
    ASSERT_TRUE(fs::exists(dir.path() / "damped-string.csv"));
    ASSERT_TRUE(fs::exists(dir.path() / "damped-string.json"));
    std::ifstream csv(dir.path() / "damped-string.csv");
    std::string header, row;
    std::getline(csv, header);
    EXPECT_EQ(header, "t,x,q,v[q,1],v[q,2],s[1],s[2]");
    std::getline(csv, row);
    std::getline(csv, row);
    EXPECT_TRUE(std::regex_search(row, std::regex(R"(0\.0314107590781\d+)"))) << row;
    std::size_t rows = 2;
    while (std::getline(csv, row)) ++rows;
    EXPECT_EQ(rows, 101u * 200u);
    std::ifstream js(dir.path() / "damped-string.json");
    const auto j = json::parse(js);
    EXPECT_EQ(j["solution"]["axes"][0]["nodes"], 200);
    EXPECT_LT(j["max_error"].get<double>(), 1e-3);
}

TEST(Cli, SimulateRefinementAndErrors)
{
    TempDir dir;
    const auto out = "--out " + dir.path().string() + " ";
    const auto lap = run(out + "--format json simulate " + model("damped_laplace.kc") + " --refine 21,41,81");
    ASSERT_EQ(lap.code, 0) << lap.out;
    const auto j = json::parse(lap.out);
    EXPECT_NEAR(j["order"].get<double>(), 2.0, 0.3);
    EXPECT_EQ(j["refinement"].size(), 3u);
    EXPECT_TRUE(fs::exists(dir.path() / "damped-laplace_refine.csv"));

    const auto small = run(out + "simulate " + model("damped_string.kc") + " --nt 3");
    EXPECT_EQ(small.code, 2);
    EXPECT_NE(small.out.find("grid too small"), std::string::npos) << small.out;
    const auto cfl = run(out + "simulate " + model("damped_string.kc") + " --nt 21");
    EXPECT_EQ(cfl.code, 2);
    EXPECT_NE(cfl.out.find("CFL violation"), std::string::npos);
    EXPECT_EQ(run(out + "simulate " + model("affine.kc")).code, 2);
    EXPECT_EQ(run(out + "simulate " + model("damped_string.kc") + " --param mu=1").code, 2);
    EXPECT_EQ(run(out + "simulate " + model("telegrapher.kc") + " --refine 41,81").code, 0);
    EXPECT_EQ(run(out + "simulate " + model("coupled_strings.kc") + " --nx 41 --nt 41").code, 0);
}
