#include <filesystem>
#include <doctest.h>

#include "cli_helper.hpp"

using testutil::run_cli;
using testutil::scratch_dir;
using testutil::slurp;
using testutil::spit;

namespace {

// small cohort shared by the CLI cases
struct Pipeline {
    std::filesystem::path dir = scratch_dir("cli");
    std::string csv = (dir / "cohort.csv").string();
    std::string split = (dir / "cohort.split.json").string();
    std::string model = (dir / "model.json").string();

    Pipeline() {
        auto gen = run_cli("generate --out " + csv +
                           " --n-positive 30 --n-negative 30 --seed 5");
        REQUIRE(gen.exit_code == 0);
        auto train = run_cli("train --data " + csv + " --out " + model +
                             " --max-epochs 3 --seed 5");
        REQUIRE(train.exit_code == 0);
    }
};

Pipeline& pipeline() {
    static Pipeline p;
    return p;
}

}  // namespace

TEST_CASE("cli generate writes csv and manifest deterministically") {
    auto& p = pipeline();
    CHECK(std::filesystem::exists(p.csv));
    CHECK(std::filesystem::exists(p.split));
    std::string first = slurp(p.csv);
    CHECK(first.rfind("r1,r2,", 0) == 0);
    CHECK(std::count(first.begin(), first.end(), '\n') == 61);  // header + 60 rows

    std::string copy = (p.dir / "again.csv").string();
    auto again = run_cli("generate --out " + copy +
                         " --n-positive 30 --n-negative 30 --seed 5");
    REQUIRE(again.exit_code == 0);
    CHECK(slurp(copy) == first);

    std::string other = (p.dir / "other.csv").string();
    run_cli("generate --out " + other +
            " --n-positive 30 --n-negative 30 --seed 6");
    CHECK(slurp(other) != first);
}

TEST_CASE("cli generate rejects bad specs and paths") {
    auto& p = pipeline();
    auto bad = run_cli("generate --out " + (p.dir / "x.csv").string() +
                       " --n-positive 0");
    CHECK(bad.exit_code == 2);
    auto unwritable = run_cli("generate --out /nonexistent-dir/out.csv");
    CHECK(unwritable.exit_code == 2);
}

TEST_CASE("cli train reports the best epoch and writes curves") {
    auto& p = pipeline();
    std::string curves = (p.dir / "curves.csv").string();
    std::string model2 = (p.dir / "model2.json").string();
    auto r = run_cli("train --data " + p.csv + " --out " + model2 +
                     " --max-epochs 1 --curves-csv " + curves + " --seed 5");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("best epoch: 1") != std::string::npos);
    CHECK(r.out.find("best validation mse:") != std::string::npos);
    std::string curve_text = slurp(curves);
    CHECK(std::count(curve_text.begin(), curve_text.end(), '\n') == 2);  // header + 1

    auto missing = run_cli("train --data " + (p.dir / "nope.csv").string());
    CHECK(missing.exit_code == 2);
}

TEST_CASE("cli evaluate emits report artifacts") {
    auto& p = pipeline();
    std::string report = (p.dir / "report.json").string();
    std::string roc_csv_path = (p.dir / "roc.csv").string();
    std::string roc_svg_path = (p.dir / "roc.svg").string();
    auto r = run_cli("evaluate --model " + p.model + " --data " + p.csv +
                     " --out " + report + " --roc-csv " + roc_csv_path +
                     " --roc-svg " + roc_svg_path + " --seed 5");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("overall") != std::string::npos);
    CHECK(slurp(report).find("\"splits\"") != std::string::npos);
    CHECK(slurp(roc_csv_path).rfind("threshold,tpr,fpr", 0) == 0);
    CHECK(slurp(roc_svg_path).rfind("<svg", 0) == 0);

    auto again = run_cli("evaluate --model " + p.model + " --data " + p.csv +
                         " --out " + report + " --seed 5");
    REQUIRE(again.exit_code == 0);
    CHECK(again.out == r.out);

    // model/data width mismatch is a user error
    std::string narrow = (p.dir / "narrow.csv").string();
    spit(narrow, "r1,r2,label\n36.5,36.6,0\n38.5,38.6,1\n");
    auto mismatch = run_cli("evaluate --model " + p.model + " --data " + narrow);
    CHECK(mismatch.exit_code == 2);
}

TEST_CASE("cli report renders a saved evaluation") {
    auto& p = pipeline();
    std::string report = (p.dir / "report2.json").string();
    REQUIRE(run_cli("evaluate --model " + p.model + " --data " + p.csv +
                    " --out " + report + " --seed 5")
                .exit_code == 0);
    auto r = run_cli("report --eval " + report);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("training") != std::string::npos);
    CHECK(r.out.find("specificity") != std::string::npos);

    std::string curves = (p.dir / "report_curves.csv").string();
    std::string curves_svg_path = (p.dir / "report_curves.svg").string();
    REQUIRE(run_cli("train --data " + p.csv + " --out " +
                    (p.dir / "m3.json").string() + " --max-epochs 2 --curves-csv " +
                    curves + " --seed 5")
                .exit_code == 0);
    auto with_curves = run_cli("report --eval " + report + " --curves " + curves +
                               " --curves-svg " + curves_svg_path);
    REQUIRE(with_curves.exit_code == 0);
    CHECK(with_curves.out.find("best epoch:") != std::string::npos);
    CHECK(slurp(curves_svg_path).rfind("<svg", 0) == 0);

    auto missing = run_cli("report --eval " + (p.dir / "nope.json").string());
    CHECK(missing.exit_code == 2);
}

TEST_CASE("cli detect streams one verdict per line") {
    auto& p = pipeline();
    std::string input = (p.dir / "subjects.txt").string();
    // settled series: eleven readings each; short line gets a null record
    std::string eleven_39;
    std::string eleven_36;
    for (int i = 0; i < 11; ++i) {
        eleven_39 += "39.0 ";
        eleven_36 += "36.5 ";
    }
    spit(input, eleven_39 + "\n" + eleven_36 + "\n36.5 36.6 36.4\n");
    auto r = run_cli("detect --model " + p.model + " --input " + input);
    REQUIRE(r.exit_code == 0);
    auto lines = std::count(r.out.begin(), r.out.end(), '\n');
    CHECK(lines == 3);
    // the fixture model is undertrained; verdict correctness on the default
    // model is covered by the acceptance suite. Scores must still rank the
    // febrile series above the afebrile one.
    double score_39 = 0.0;
    double score_36 = 0.0;
    std::sscanf(r.out.c_str(), "{\"score\":%lf", &score_39);
    auto second = r.out.find('\n') + 1;
    std::sscanf(r.out.c_str() + second, "{\"score\":%lf", &score_36);
    CHECK(score_39 > score_36);
    CHECK(r.out.find("\"verdict\":") != std::string::npos);
    CHECK(r.out.find("{\"score\":null,\"verdict\":\"insufficient-history\"") !=
          std::string::npos);

    // stdin path behaves the same
    auto piped = run_cli("detect --model " + p.model, input);
    CHECK(piped.out == r.out);

    auto bad = run_cli("detect --model " + p.model + " --input " +
                       (p.dir / "nope.txt").string());
    CHECK(bad.exit_code == 2);
}

TEST_CASE("cli emit-hdl") {
    auto& p = pipeline();
    std::string v_path = (p.dir / "core.v").string();
    auto r = run_cli("emit-hdl --model " + p.model + " --out " + v_path +
                     " --module-name fever_core");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("saturated constants:") != std::string::npos);
    std::string text = slurp(v_path);
    CHECK(text.find("module fever_core (") != std::string::npos);
    std::string manifest = slurp((p.dir / "core.json").string());
    CHECK(manifest.find("\"fingerprint\"") != std::string::npos);

    auto again = run_cli("emit-hdl --model " + p.model + " --out " + v_path +
                         " --module-name fever_core");
    REQUIRE(again.exit_code == 0);
    CHECK(slurp(v_path) == text);

    auto bad_format = run_cli("emit-hdl --model " + p.model + " --out " + v_path +
                              " --total-bits 16 --frac-bits 16");
    CHECK(bad_format.exit_code == 2);
}

TEST_CASE("cli config file overrides defaults") {
    auto& p = pipeline();
    std::string cfg_path = (p.dir / "config.json").string();
    spit(cfg_path,
         "{\"seed\": 5, \"generate\": {\"n-positive\": 30, \"n-negative\": 30}}");
    std::string out = (p.dir / "fromcfg.csv").string();
    auto r = run_cli("generate --config " + cfg_path + " --out " + out);
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(out) == slurp(p.csv));  // same spec as the fixture cohort

    auto bad = run_cli("generate --config " + (p.dir / "nope.json").string() +
                       " --out " + out);
    CHECK(bad.exit_code == 2);
}

TEST_CASE("cli usage errors exit with code 2") {
    auto unknown = run_cli("train --no-such-flag 1");
    CHECK(unknown.exit_code == 2);
    auto no_sub = run_cli("");
    CHECK(no_sub.exit_code == 2);
    auto help = run_cli("--help");
    CHECK(help.exit_code == 0);
}
