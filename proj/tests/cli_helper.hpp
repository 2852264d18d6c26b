#pragma once

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testutil {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

// Runs the built CLI with output captured to a file. `args` is appended to
// the binary path verbatim; callers quote as needed.
inline CliResult run_cli(const std::string& args,
                         const std::string& stdin_path = "") {
    static int counter = 0;
    std::filesystem::path cap = std::filesystem::temp_directory_path() /
                                ("fscli_out_" + std::to_string(::getpid()) + "_" +
                                 std::to_string(counter++) + ".txt");
    std::string cmd = std::string(FEVERSCREEN_CLI_PATH) + " " + args;
    if (!stdin_path.empty()) cmd += " < " + stdin_path;
    cmd += " > " + cap.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(cap.string());
    std::filesystem::remove(cap);
    return r;
}

// Fresh scratch directory per test site.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("feverscreen_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testutil
