// CLI contract checks: exit codes, reproducibility of emitted files, and the
// documented flag surface. Drives the actual binary via std::system.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string g_tool;
int g_failures = 0;

void check(bool ok, const std::string& what) {
    if (ok) {
        std::cout << "  ok: " << what << "\n";
    } else {
        std::cout << "  FAILED: " << what << "\n";
        ++g_failures;
    }
}

int run(const std::string& args) {
    const std::string cmd = g_tool + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: test_cli <path-to-pcqa>\n";
        return 2;
    }
    g_tool = argv[1];
    const fs::path root = fs::temp_directory_path() / "pcqa_test_cli";
    fs::remove_all(root);
    fs::create_directories(root);
    const std::string data = (root / "data").string();

    check(run("") == 1, "no subcommand is a usage error (exit 1)");
    check(run("gen-data") == 1, "missing --out is a usage error (exit 1)");
    check(run("frobnicate --out x") == 1, "unknown subcommand is a usage error");
    check(run("gen-data --out " + data + " --no-such-flag 1") == 1, "unknown flag is rejected");
    check(run("--help") == 0, "--help exits 0");

    check(run("gen-data --out " + data + " --n-base 2 --severities 3 --n-points 256 --subjects 5") == 0,
          "gen-data succeeds");
    check(fs::exists(root / "data" / "run_header.json"), "gen-data writes a run header");

    const std::string data2 = (root / "data2").string();
    run("gen-data --out " + data2 + " --n-base 2 --severities 3 --n-points 256 --subjects 5");
    check(slurp(root / "data" / "manifest.jsonl") == slurp(root / "data2" / "manifest.jsonl"),
          "identical gen-data invocations produce identical manifests");

    check(run("render --ply " + data + "/sphere00_compound_s2.ply --out " + (root / "render").string() +
              " --views 2 --height 32 --width 32") == 0,
          "render succeeds");
    check(run("render --ply " + data + "/manifest.jsonl --out " + (root / "r2").string()) == 2,
          "rendering a non-PLY input is a data error (exit 2)");

    const std::string cfg_path = (root / "train.cfg").string();
    {
        std::ofstream cfg(cfg_path);
        cfg << "height = 16\nwidth = 16\nnum_views = 2\nepochs = 2\nbatch = 4\nlr = 1e-3\n"
               "latent_dim = 2\nfusion_channels = 2\nencoder_channels = 2,3\nencoder_fc_hidden = 4\n"
               "stage_channels = 3,4,5,6\n";
    }
    const std::string train_out = (root / "train").string();
    check(run("train --manifest " + data + "/manifest.jsonl --out " + train_out + " --config " + cfg_path +
              " --seed 3") == 0,
          "train succeeds with a config file");
    check(fs::exists(root / "train" / "checkpoint.bin"), "train writes a checkpoint");
    check(fs::exists(root / "train" / "train_log.jsonl"), "train writes a log");

    {
        std::ofstream bad(root / "bad.cfg");
        bad << "lr = 1e-3\nmystery = 4\n";
    }
    check(run("train --manifest " + data + "/manifest.jsonl --out " + (root / "t2").string() +
              " --config " + (root / "bad.cfg").string()) == 2,
          "config parse errors are data errors (exit 2)");

    const std::string score_out = (root / "score").string();
    check(run("score --checkpoint " + train_out + "/checkpoint.bin --manifest " + data +
              "/manifest.jsonl --out " + score_out + " --samples 5 --seed 9") == 0,
          "score succeeds");
    const std::string score_out2 = (root / "score2").string();
    run("score --checkpoint " + train_out + "/checkpoint.bin --manifest " + data +
        "/manifest.jsonl --out " + score_out2 + " --samples 5 --seed 9");
    check(slurp(root / "score" / "predictions.csv") == slurp(root / "score2" / "predictions.csv"),
          "identical score invocations produce identical CSVs");

    // --samples 1: late and early outputs are byte-identical.
    const std::string s_late = (root / "late1").string(), s_early = (root / "early1").string();
    run("score --checkpoint " + train_out + "/checkpoint.bin --manifest " + data + "/manifest.jsonl --out " +
        s_late + " --samples 1 --mode late --seed 4");
    run("score --checkpoint " + train_out + "/checkpoint.bin --manifest " + data + "/manifest.jsonl --out " +
        s_early + " --samples 1 --mode early --seed 4");
    check(slurp(root / "late1" / "predictions.csv") == slurp(root / "early1" / "predictions.csv"),
          "--samples 1 late/early predictions are byte-identical");

    check(run("eval --predictions " + score_out + "/predictions.csv --manifest " + data +
              "/manifest.jsonl --out " + (root / "eval").string()) == 0,
          "eval succeeds");
    check(fs::exists(root / "eval" / "metrics.json"), "eval writes metrics.json");

    // Corrupt the ids: eval must fail listing the offender.
    {
        std::ifstream in(root / "score" / "predictions.csv");
        std::ofstream out(root / "shuffled.csv");
        std::string line;
        std::getline(in, line);
        out << line << "\n";
        while (std::getline(in, line)) out << "zzz_" << line << "\n";
    }
    check(run("eval --predictions " + (root / "shuffled.csv").string() + " --manifest " + data +
              "/manifest.jsonl --out " + (root / "eval2").string()) == 2,
          "id mismatch is a data error (exit 2)");

    check(run("score --checkpoint " + data + "/manifest.jsonl --ply " + data +
              "/sphere00_compound_s2.ply --out " + (root / "s3").string()) == 2,
          "a non-checkpoint file is a data error");

    // An absurd learning rate overflows float32 within a couple of steps;
    // the trainer must abort and the CLI must exit with the divergence code.
    {
        std::ofstream cfg(root / "diverge.cfg");
        cfg << "height = 16\nwidth = 16\nnum_views = 2\nepochs = 2\nbatch = 4\nlr = 1e25\n"
               "latent_dim = 2\nfusion_channels = 2\nencoder_channels = 2,3\nencoder_fc_hidden = 4\n"
               "stage_channels = 3,4,5,6\n";
    }
    check(run("train --manifest " + data + "/manifest.jsonl --out " + (root / "tdiv").string() +
              " --config " + (root / "diverge.cfg").string()) == 3,
          "numerical divergence exits 3");
    {
        const std::string log = slurp(root / "tdiv" / "train_log.jsonl");
        check(log.find("divergence") != std::string::npos, "divergence event recorded in the log");
    }

    if (g_failures == 0) {
        std::cout << "test_cli: all checks passed\n";
        return 0;
    }
    std::cout << "test_cli: " << g_failures << " checks FAILED\n";
    return 1;
}
