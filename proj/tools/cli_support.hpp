#pragma once

// Plumbing for the command-line pipeline: key-value config, output-directory lock, atomic
// writes, content hashes and per-command manifests.

#include <chanscope/core.hpp>
#include <chanscope/io.hpp>

#include <openssl/evp.h>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace chanscope::cli {

namespace fs = std::filesystem;

#ifndef CHANSCOPE_VERSION
#define CHANSCOPE_VERSION "0.0.0"
#endif

inline constexpr const char* kVersion = CHANSCOPE_VERSION;

/// Validation failure tied to an input file; `line` is 0 when no line applies.
class InputError : public Error {
public:
    InputError(std::string file, std::size_t line, const std::string& message)
        : Error(message), file_(std::move(file)), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

/// Strips the "line N: " prefix that ParseError puts in front of its message.
inline std::string bare_message(const ParseError& e) {
    std::string what = e.what();
    std::string prefix = "line " + std::to_string(e.line()) + ": ";
    return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

// ---------------------------------------------------------------------------
// Config

struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
    bool is_path = false;
};

/// `key = value` lines; `#` starts a comment. Unknown keys are rejected.
class Config {
public:
    explicit Config(std::vector<ConfigKey> schema) {
        for (auto& k : schema) {
            values_[k.name] = k.default_value;
            schema_.emplace(k.name, std::move(k));
        }
    }

    void load(const fs::path& file) {
        std::ifstream in(file);
        if (!in) throw InputError(file.string(), 0, "cannot open config file");
        base_ = fs::absolute(file).parent_path().lexically_normal();
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r");
                if (b == std::string::npos) return std::string();
                auto e = s.find_last_not_of(" \t\r");
                return s.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) throw InputError(file.string(), lineno, "expected 'key = value'");
            auto key = trim(line.substr(0, eq));
            auto value = trim(line.substr(eq + 1));
            if (!schema_.count(key)) throw InputError(file.string(), lineno, "unknown config key '" + key + "'");
            values_[key] = value;
        }
    }

    void set(const std::string& key, const std::string& value) {
        if (!schema_.count(key)) throw Error("unknown config key '" + key + "'");
        values_[key] = value;
    }

    const std::string& str(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw Error("internal: undeclared config key '" + key + "'");
        return it->second;
    }

    bool empty(const std::string& key) const { return str(key).empty(); }

    template <typename F>
    auto wrap(const std::string& key, F f) const {
        try {
            return f();
        } catch (const Error& e) {
            throw Error("config key '" + key + "': " + e.what());
        }
    }

    std::int64_t integer(const std::string& key) const { return wrap(key, [&] { return io::parse_int(str(key)); }); }
    double real(const std::string& key) const { return wrap(key, [&] { return io::parse_real(str(key)); }); }
    bool boolean(const std::string& key) const { return wrap(key, [&] { return io::parse_bool(str(key)); }); }

    std::vector<std::string> list(const std::string& key) const {
        std::vector<std::string> out;
        std::stringstream ss(str(key));
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) out.push_back(item);
        return out;
    }

    /// Path values resolve against the config file's directory.
    fs::path path(const std::string& key) const { return resolve(str(key)); }

    fs::path resolve(const std::string& value) const {
        fs::path p(value);
        return p.is_relative() ? (base_ / p).lexically_normal() : p.lexically_normal();
    }

    const fs::path& base() const { return base_; }
    const std::map<std::string, ConfigKey>& schema() const { return schema_; }

    io::ordered_json to_json() const {
        io::ordered_json j = io::ordered_json::object();
        for (const auto& [k, v] : values_) j[k] = v;
        return j;
    }

private:
    std::map<std::string, ConfigKey> schema_;
    std::map<std::string, std::string> values_;
    fs::path base_ = fs::current_path();
};

// ---------------------------------------------------------------------------
// Hashing

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("sha256 failed");
    }
    EVP_MD_CTX_free(ctx);
    std::ostringstream out;
    for (unsigned i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return out.str();
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Workspace

/// One command's view of the output directory. Holds the lock for its lifetime and records every
/// input read and output written for the manifest.
class Workspace {
public:
    Workspace(fs::path out_dir, std::string command, const Config& config, std::uint64_t seed)
        : out_(fs::absolute(out_dir).lexically_normal()), command_(std::move(command)), config_(config), seed_(seed) {
        std::error_code ec;
        fs::create_directories(out_, ec);
        if (ec) throw InputError(out_.string(), 0, "cannot create output directory: " + ec.message());
        lock_path_ = out_ / ".chanscope.lock";
        lock_fd_ = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (lock_fd_ < 0)
            throw InputError(lock_path_.string(), 0,
                             "output directory is locked by another invocation; remove the lock file if stale");
    }

    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    ~Workspace() {
        if (lock_fd_ >= 0) {
            ::close(lock_fd_);
            std::error_code ec;
            fs::remove(lock_path_, ec);
        }
    }

    const fs::path& out_dir() const { return out_; }
    fs::path out(const std::string& name) const { return out_ / name; }

    /// Opens an input, hashing it for the manifest. `producer` names the command that creates it.
    void read(const fs::path& p, const std::function<void(std::istream&)>& fn, const std::string& producer = {}) {
        std::string data;
        if (!fs::is_regular_file(p)) {
            std::string msg = "missing input";
            if (!producer.empty()) msg += " (produced by 'chanscope " + producer + "')";
            throw InputError(display(p), 0, msg);
        }
        data = read_file(p);
        inputs_[display(p)] = sha256_hex(data);
        std::istringstream in(data);
        try {
            fn(in);
        } catch (const InputError&) {
            throw;
        } catch (const ParseError& e) {
            throw InputError(display(p), e.line(), bare_message(e));
        } catch (const io::json::exception& e) {
            throw InputError(display(p), 0, e.what());
        } catch (const Error& e) {
            throw InputError(display(p), 0, e.what());
        }
    }

    std::string read_text(const fs::path& p, const std::string& producer = {}) {
        std::string text;
        read(p, [&](std::istream& in) {
            std::ostringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        }, producer);
        return text;
    }

    io::json read_json(const fs::path& p, const std::string& producer = {}) {
        io::json j;
        read(p, [&](std::istream& in) {
            try {
                j = io::json::parse(in);
            } catch (const io::json::parse_error& e) {
                throw ParseError(0, std::string("invalid JSON: ") + e.what());
            }
        }, producer);
        return j;
    }

    /// Writes `name` under the output directory via a temporary file and rename.
    void write(const std::string& name, const std::string& content) {
        auto target = out(name);
        auto tmp = out("." + name + ".tmp");
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            if (!f) throw Error("cannot write " + tmp.string());
            f << content;
            f.flush();
            if (!f) throw Error("short write to " + tmp.string());
        }
        std::error_code ec;
        fs::rename(tmp, target, ec);
        if (ec) throw Error("cannot move " + tmp.string() + " into place: " + ec.message());
        outputs_[name] = sha256_hex(content);
    }

    void write_json(const std::string& name, const io::ordered_json& j) { write(name, j.dump(2) + "\n"); }

    /// Records the manifest for this run; called last so it covers every output.
    void finish(const io::ordered_json& extra = {}) {
        io::ordered_json m;
        m["command"] = command_;
        m["version"] = kVersion;
        m["seed"] = seed_;
        m["config"] = config_.to_json();
        auto list = [](const std::map<std::string, std::string>& files) {
            io::ordered_json a = io::ordered_json::array();
            for (const auto& [path, hash] : files) a.push_back({{"path", path}, {"sha256", hash}});
            return a;
        };
        m["inputs"] = list(inputs_);
        m["outputs"] = list(outputs_);
        if (!extra.is_null()) m["details"] = extra;
        std::error_code ec;
        fs::create_directories(out_ / "manifests", ec);
        auto name = "manifests/" + command_ + ".manifest.json";
        auto content = m.dump(2) + "\n";
        auto tmp = out_ / ("manifests/." + command_ + ".tmp");
        {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            f << content;
        }
        fs::rename(tmp, out_ / name, ec);
        if (ec) throw Error("cannot write manifest: " + ec.message());
    }

    /// Output-relative names for files in the output directory, config-relative otherwise.
    std::string display(const fs::path& p) const {
        auto norm = p.lexically_normal();
        auto rel = norm.lexically_relative(out_.lexically_normal());
        if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
        auto crel = norm.lexically_relative(config_.base().lexically_normal());
        if (!crel.empty() && *crel.begin() != "..") return crel.generic_string();
        return norm.generic_string();
    }

private:
    fs::path out_;
    std::string command_;
    const Config& config_;
    std::uint64_t seed_;
    fs::path lock_path_;
    int lock_fd_ = -1;
    std::map<std::string, std::string> inputs_;
    std::map<std::string, std::string> outputs_;
};

} // namespace chanscope::cli
