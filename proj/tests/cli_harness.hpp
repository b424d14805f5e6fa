#pragma once

// Runs the kpicomp binary in a scratch directory and captures its output.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#ifndef KPICOMP_CLI_PATH
#error "KPICOMP_CLI_PATH must point at the kpicomp executable"
#endif

namespace cli {

namespace fs = std::filesystem;

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Scratch {
public:
    explicit Scratch(const std::string& name)
        : dir_(fs::temp_directory_path() / ("kpicomp_" + name + "_" + std::to_string(::getpid())))
    {
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~Scratch() { fs::remove_all(dir_); }
    Scratch(const Scratch&) = delete;
    Scratch& operator=(const Scratch&) = delete;

    const fs::path& dir() const { return dir_; }
    fs::path path(const std::string& name) const { return dir_ / name; }
    std::string read(const std::string& name) const { return slurp(path(name)); }
    void write(const std::string& name, const std::string& text) const
    {
        std::ofstream(path(name), std::ios::binary) << text;
    }

    /// Runs `kpicomp <args>` with the scratch directory as working directory.
    Result run(const std::string& args) const
    {
        const auto out = dir_ / ".stdout", err = dir_ / ".stderr";
        const std::string cmd = "cd '" + dir_.string() + "' && '" KPICOMP_CLI_PATH "' " + args + " >'" + out.string() +
                                "' 2>'" + err.string() + "'";
        const int status = std::system(cmd.c_str());
        Result r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

private:
    fs::path dir_;
};

inline std::size_t count_lines(const std::string& text)
{
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

}  // namespace cli
