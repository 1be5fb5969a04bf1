#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / "qst_cli_test.log";
    const std::string cmd =
        std::string(QST_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    return {status == 0 ? 0 : 1, ss.str()};
}

fs::path write_file(const std::string& name, const std::string& body) {
    const fs::path path = fs::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << body;
    return path;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::string read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("minimal rr-transfer config produces the default CSV") {
    const fs::path cfg = write_file("qst_min.json", R"({"lattice": {"N": 3, "L": 2}})");
    const fs::path out = fs::temp_directory_path() / "qst_min_out.csv";

    const RunResult res =
        run_cli("rr-transfer -c " + cfg.string() + " -o " + out.string());
    REQUIRE(res.exit_code == 0);

    const auto lines = read_lines(out);
    REQUIRE(lines.size() == 1002);  // header + 1001 grid rows
    CHECK(lines[0] == "t,f");
    CHECK(lines[1].rfind("0,", 0) == 0);
}

TEST_CASE("missing lattice.L is reported with its field path") {
    const fs::path cfg = write_file("qst_bad.json", R"({"lattice": {"N": 3}})");
    const RunResult res = run_cli("rr-transfer -c " + cfg.string());
    CHECK(res.exit_code != 0);
    CHECK(res.output.find("lattice.L") != std::string::npos);
}

TEST_CASE("same config and seed give byte-identical CSVs") {
    const fs::path cfg = write_file("qst_haar.json",
                                    R"({"lattice": {"N": 3, "L": 2},
                                        "input": {"haar": {"n": 6}},
                                        "grid": {"t_max": 5.0, "dt": 0.5}})");
    const fs::path out1 = fs::temp_directory_path() / "qst_haar_1.csv";
    const fs::path out2 = fs::temp_directory_path() / "qst_haar_2.csv";

    REQUIRE(run_cli("haar-average -c " + cfg.string() + " --seed 42 -o " + out1.string())
                .exit_code == 0);
    REQUIRE(run_cli("haar-average -c " + cfg.string() + " --seed 42 --threads 4 -o " +
                    out2.string())
                .exit_code == 0);
    const std::string a = read_all(out1);
    const std::string b = read_all(out2);
    REQUIRE_FALSE(a.empty());
    CHECK(a == b);

    // Without a seed the run must refuse, not draw silent entropy.
    const RunResult noseed = run_cli("haar-average -c " + cfg.string());
    CHECK(noseed.exit_code != 0);
    CHECK(noseed.output.find("seed") != std::string::npos);
}

TEST_CASE("json output echoes the effective config") {
    const fs::path cfg = write_file("qst_json.json",
                                    R"({"lattice": {"N": 2, "L": 2},
                                        "grid": {"t_max": 2.0, "dt": 1.0}})");
    const fs::path out = fs::temp_directory_path() / "qst_out.json";
    const RunResult res = run_cli("rr-transfer -c " + cfg.string() +
                                  " --format json --u 0.03 -o " + out.string());
    REQUIRE(res.exit_code == 0);
    const std::string body = read_all(out);
    CHECK(body.find("\"config\"") != std::string::npos);
    CHECK(body.find("\"metadata\"") != std::string::npos);
    CHECK(body.find("\"tool_version\"") != std::string::npos);
    CHECK(body.find("0.03") != std::string::npos);  // flag override echoed
}
