// End-to-end checks of the command-line surface: exit codes, file outputs
// and the printed metrics line. The binary path arrives in MSNET_CLI.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "msnet/data.hpp"
#include "msnet/runconfig.hpp"

namespace fs = std::filesystem;
using namespace msnet;

namespace {

std::string cli() {
    const char* path = std::getenv("MSNET_CLI");
    REQUIRE_MESSAGE(path != nullptr, "MSNET_CLI must point at the msnet binary");
    return path;
}

std::string work_dir() {
    const auto dir = fs::temp_directory_path() / "msnet_cli_test";
    fs::create_directories(dir);
    return dir.string();
}

int run(const std::string& args, const std::string& stdout_path = "/dev/null") {
    const std::string cmd = cli() + " " + args + " > " + stdout_path + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
}

}  // namespace

TEST_CASE("gen-data writes the documented byte count and is seed-stable") {
    const std::string dir = work_dir();
    const std::string a = dir + "/gen_a.msds";
    const std::string b = dir + "/gen_b.msds";
    CHECK(run("gen-data --out " + a + " --resolution 64 --count 8 --seed 3") == 0);
    CHECK(run("gen-data --out " + b + " --resolution 64 --count 8 --seed 3") == 0);
    CHECK(fs::file_size(a) == 18u + 8u * (1 * 64 * 64 * 4 + 64 * 64));
    CHECK(read_file(a) == read_file(b));
}

TEST_CASE("bad gen-data arguments exit with the config code") {
    const std::string dir = work_dir();
    CHECK(run("gen-data --out " + dir + "/x.msds --resolution 60 --count 2 --seed 1") == 2);
}

TEST_CASE("config errors exit 2, io errors exit 3") {
    const std::string dir = work_dir();
    write_file(dir + "/unknown_key.json",
               "{\"variant\": \"FCN8s\", \"learning_rate\": 0.1}");
    CHECK(run("train --config " + dir + "/unknown_key.json") == 2);
    CHECK(run("train --config " + dir + "/does_not_exist.json") == 3);
    CHECK(run("gradcheck --variant NotANet --seed 1") == 2);

    write_file(dir + "/bad_magic.mswt", "XXXXgarbage");
    write_file(dir + "/eval_cfg.json", "{\"variant\": \"FCN8s\", \"input_h\": 32, \"input_w\": 32}");
    CHECK(run("gen-data --out " + dir + "/eval_data.msds --resolution 32 --count 1 --seed 1") == 0);
    CHECK(run("eval --config " + dir + "/eval_cfg.json --weights " + dir +
              "/bad_magic.mswt --data " + dir + "/eval_data.msds") == 3);
}

TEST_CASE("train, eval and predict round-trip through their files") {
    const std::string dir = work_dir();
    const std::string data = dir + "/train.msds";
    CHECK(run("gen-data --out " + data + " --resolution 32 --count 1 --seed 29") == 0);

    // small but long enough to label the single sample perfectly
    write_file(dir + "/run_cfg.json",
               "{\n"
               "  \"variant\": \"FCN8s\",\n"
               "  \"input_h\": 32, \"input_w\": 32,\n"
               "  \"epochs\": 250, \"batch_size\": 1, \"seed\": 31,\n"
               "  \"base_lr\": 0.01, \"decay_rate\": 0.0,\n"
               "  \"train_data\": \"" + data + "\",\n"
               "  \"out_dir\": \"" + dir + "/run\"\n"
               "}");
    CHECK(run("train --config " + dir + "/run_cfg.json") == 0);
    CHECK(fs::exists(dir + "/run/history.csv"));
    CHECK(fs::exists(dir + "/run/weights.mswt"));
    CHECK(fs::exists(dir + "/run/config.json"));

    // the echoed config is fully resolved and re-parses to the same RunConfig
    const RunConfig parsed = load_run_config(dir + "/run_cfg.json");
    const RunConfig echoed = load_run_config(dir + "/run/config.json");
    CHECK(echoed == parsed);

    const std::string history = read_file(dir + "/run/history.csv");
    CHECK(history.rfind("epoch,lr,master_loss,slave_loss,ms\n", 0) == 0);

    const std::string metrics = dir + "/eval_out.txt";
    CHECK(run("eval --config " + dir + "/run/config.json --weights " + dir +
                  "/run/weights.mswt --data " + data,
              metrics) == 0);
    CHECK(read_file(metrics) == "PA=1.0000, CA=1.0000, IU=1.0000\n");

    CHECK(run("predict --weights " + dir + "/run/weights.mswt --data " + data + " --out-dir " +
              dir + "/preds") == 0);
    const std::string pgm_path = dir + "/preds/pred_0000.pgm";
    REQUIRE(fs::exists(pgm_path));
    const std::string pgm = read_file(pgm_path);
    const LabelMap labels = parse_pgm(std::vector<std::uint8_t>(pgm.begin(), pgm.end()));
    CHECK(labels.h == 32);
    CHECK(labels.w == 32);

    // a perfectly fit model predicts the ground truth at every scored pixel
    const Dataset ds = load_dataset(data);
    int mismatches = 0;
    for (std::size_t e = 0; e < ds.samples[0].labels.labels.size(); ++e) {
        const auto gt = ds.samples[0].labels.labels[e];
        if (gt != kIgnoreLabel && labels.labels[e] != gt) ++mismatches;
    }
    CHECK(mismatches == 0);
}

TEST_CASE("gradcheck passes for a healthy build") {
    const std::string dir = work_dir();
    const std::string out = dir + "/gradcheck.txt";
    CHECK(run("gradcheck --variant FCN8s --seed 2", out) == 0);
    const std::string text = read_file(out);
    CHECK(text.find("max_rel_error=") != std::string::npos);
}
