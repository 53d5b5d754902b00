#include "ricci/cli.hpp"
#include "ricci/models.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ricci;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("ricci_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("certify and gap") {
    const Outcome c = call({"certify", "bl(6,3)"});
    CHECK(c.code == 0);
    CHECK(contains(c.out, "kappa: 4/9"));
    CHECK(contains(c.out, "on_diagonal: 2/9"));
    CHECK(contains(c.out, "triangles: 2/9"));

    const Outcome g = call({"gap", "rt(4)"});
    CHECK(g.code == 0);
    CHECK(contains(g.out, "spectral_gap: 0.666666667"));

    const auto j = nlohmann::json::parse(call({"--format", "json", "certify", "rt(4)"}).out);
    CHECK(j["command"] == "certify");
    CHECK(j["version"] == cli::kVersion);
    CHECK(j["kappa"] == "1/3");

    CHECK(call({"counterexample"}).code == 0);
    const auto ce = nlohmann::json::parse(call({"--format", "json", "counterexample", "--eps", "0.1"}).out);
    CHECK(ce["rows"].size() == 1);
}

TEST_CASE("exit codes") {
    CHECK(call({}).code == 2);
    CHECK(call({"gap", "bl(4)"}).code == 2);
    CHECK(call({"gap", "bl(3,5)"}).code == 2);
    CHECK(call({"gap", "rt(x)"}).code == 2);
    CHECK(call({"gap", "torus(3)"}).code == 2);
    CHECK(call({"gap", "file:/nonexistent/chain.txt"}).code == 2);
    CHECK(call({"--format", "yaml", "gap", "rt(3)"}).code == 2);
    CHECK(call({"counterexample", "--eps", "1.5"}).code == 2);
    CHECK(call({"transport", "complete(3)", "--steps", "1000"}).code == 2);
    CHECK(call({"--help"}).code == 0);

    const auto path = temp_file("c6.txt");
    {
        std::ofstream f(path);
        for (int i = 0; i < 6; ++i) {
            f << i << ' ' << (i + 1) % 6 << " 0.5\n" << (i + 1) % 6 << ' ' << i << " 0.5\n";
            f << "pi " << i << " 0.16666666666666667\n";
        }
    }
    const Outcome refused = call({"certify", "file:" + path.string()});
    CHECK(refused.code == 1);
    CHECK(contains(refused.out, "certified: false"));
    std::filesystem::remove(path);

    const auto bad = temp_file("bad.txt");
    {
        std::ofstream f(bad);
        f << "0 1 1\n1 0 0.5\npi 0 0.5\npi 1 0.5\n";
    }
    const Outcome unbalanced = call({"info", "file:" + bad.string()});
    CHECK(unbalanced.code == 2);
    CHECK(contains(unbalanced.err, "detailed"));
    std::filesystem::remove(bad);
}

TEST_CASE("chain files round trip") {
    const MarkovTriple src = product_chain(complete_graph(2), random_transposition(3).triple);
    for (const std::string ext : {".txt", ".json"}) {
        const auto path = temp_file("rt" + ext);
        {
            std::ofstream f(path);
            if (ext == ".json") cli::write_chain_json(f, src);
            else cli::write_chain_text(f, src);
        }
        const MarkovTriple back = cli::read_chain(path.string());
        REQUIRE(back.size() == src.size());
        CHECK(back.labels() == src.labels());
        CHECK(back.arc_count() == src.arc_count());
        for (int x = 0; x < static_cast<int>(src.size()); ++x) {
            CHECK(back.weight(x) == src.weight(x));
            for (const Arc& a : src.out(x)) CHECK(back.rate(x, a.to) == a.rate);
        }
        const Outcome info = call({"gap", "file:" + path.string()});
        CHECK(info.code == 0);
        CHECK(info.out == call({"gap", "product(complete(2),rt(3))"}).out);
        std::filesystem::remove(path);
    }

    const auto exported = temp_file("k2k2.json");
    CHECK(call({"info", "product(complete(2),complete(2))", "--export", exported.string()}).code == 0);
    const MarkovTriple k = cli::read_chain(exported.string());
    CHECK(k.size() == 4);
    CHECK(k.edges().size() == 4);
    std::filesystem::remove(exported);

    std::istringstream text("# comment\na b 1\nb a 1\npi a 0.5\npi b 0.5\n");
    const MarkovTriple named = cli::parse_chain_text(text);
    CHECK(named.labels() == std::vector<std::string>{"a", "b"});
    CHECK_THROWS_AS(cli::parse_chain_json("{\"states\": [\"a\"], \"rates\": 3}"), cli::InputError);
}

TEST_CASE("model specs") {
    CHECK(cli::parse_model("bl(5,2)").triple.size() == 10);
    CHECK(cli::parse_model(" rt(4) ").kind == cli::ModelKind::RandomTransposition);
    CHECK(cli::parse_model("product(bl(3,1),complete(2))").triple.size() == 6);
    CHECK_THROWS_AS(cli::parse_model("bl(5,2"), cli::InputError);
    CHECK_THROWS_AS(cli::parse_model("rt(99)"), cli::InputError);
    CHECK(cli::certificate_for(cli::parse_model("bl(5,2)"))->kappa == Rational(7, 12));
    CHECK(cli::certificate_for(cli::parse_model("product(complete(2),complete(2))"))->kappa == Rational(2));
}

TEST_CASE("reproducible output") {
    const std::vector<std::string> est{"--seed", "7", "estimate", "bl(4,2)", "--starts", "3", "--iterations", "40"};
    CHECK(call(est).out == call(est).out);
    const std::vector<std::string> tr{"--seed", "3", "transport", "complete(3)", "--steps", "16", "--max-steps", "32",
                                      "--kappa", "auto"};
    const Outcome a = call(tr);
    CHECK(a.code == 0);
    CHECK(a.out == call(tr).out);
    CHECK(call({"--seed", "4", "transport", "complete(3)", "--steps", "16", "--max-steps", "32"}).out != a.out);
}

TEST_CASE("verify") {
    const Outcome v = call({"verify", "bl(4,2)", "--samples", "20"});
    CHECK(v.code == 0);
    CHECK(contains(v.out, "passed: true"));
    CHECK(call({"verify", "rt(3)", "--samples", "10"}).code == 0);
}
