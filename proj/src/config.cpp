#include "taira/config.hpp"

#include "taira/errors.hpp"
#include "taira/text.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace taira {

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
}

namespace {

std::string interpolate(const std::string& value, const Config::EnvLookup& env, std::size_t line) {
    std::string out;
    for (std::size_t i = 0; i < value.size();) {
        if (value.compare(i, 2, "${") == 0) {
            auto end = value.find('}', i + 2);
            if (end == std::string::npos)
                throw ConfigError("line " + std::to_string(line) + ": unterminated ${ in value");
            const std::string name = value.substr(i + 2, end - i - 2);
            auto v = env ? env(name) : process_env(name);
            if (!v) throw ConfigError("line " + std::to_string(line) + ": environment variable " + name + " is not set");
            out += *v;
            i = end + 1;
        } else {
            out += value[i++];
        }
    }
    return out;
}

std::int64_t to_int(const std::string& key, const std::string& value) {
    std::int64_t n = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
    if (ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError("'" + key + "' must be an integer, got '" + value + "'");
    return n;
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
    if (key == "catalog_dir") catalog_dir = value;
    else if (key == "pattern_dir") pattern_dir = value;
    else if (key == "search_corpus") search_corpus = value;
    else if (key == "run_dir") run_dir = value;
    else if (key == "provider") provider = value;
    else if (key == "fixture") fixture = value;
    else if (key == "base_url") base_url = value;
    else if (key == "model") model = value;
    else if (key == "api_key_env") api_key_env = value;
    else if (key == "retrieval") retrieval = value;
    else if (key == "domain_noun") domain_noun = value;
    else if (key == "top_k") top_k = to_int(key, value);
    else if (key == "max_phases") max_phases = to_int(key, value);
    else if (key == "retry_limit") retry_limit = to_int(key, value);
    else if (key == "candidate_pool") candidate_pool = to_int(key, value);
    else if (key == "parallelism") parallelism = to_int(key, value);
    else if (key == "seed") seed = to_int(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

Config Config::parse(std::string_view text, const EnvLookup& env) {
    Config c;
    std::size_t n = 0;
    for (const auto& raw : text::split(text, "\n")) {
        ++n;
        const std::string line = text::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": expected key = value");
        const std::string key = text::trim(line.substr(0, eq));
        try {
            c.set(key, interpolate(text::trim(line.substr(eq + 1)), env, n));
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            throw ConfigError(what.rfind("line ", 0) == 0 ? what : "line " + std::to_string(n) + ": " + what);
        }
    }
    c.validate();
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    Config c = parse(ss.str());
    const auto base = path.parent_path();
    for (std::string* p : {&c.catalog_dir, &c.pattern_dir, &c.search_corpus, &c.run_dir, &c.fixture}) {
        if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
    }
    return c;
}

void Config::validate() const {
    if (provider != "scripted" && provider != "http") throw ConfigError("provider must be scripted or http");
    if (retrieval != "bm25" && retrieval != "embedding") throw ConfigError("retrieval must be bm25 or embedding");
    if (provider == "http" && (base_url.empty() || model.empty()))
        throw ConfigError("the http provider needs base_url and model");
    for (auto [name, v] : {std::pair{"top_k", top_k}, {"max_phases", max_phases}, {"retry_limit", retry_limit},
                           {"candidate_pool", candidate_pool}, {"parallelism", parallelism}}) {
        if (v <= 0) throw ConfigError(std::string(name) + " must be positive");
    }
    if (seed < 0) throw ConfigError("seed must not be negative");
}

std::string Config::serialize() const {
    std::string s;
    auto kv = [&](const char* k, const std::string& v) { s += std::string(k) + " = " + v + "\n"; };
    kv("catalog_dir", catalog_dir);
    kv("pattern_dir", pattern_dir);
    kv("search_corpus", search_corpus);
    kv("run_dir", run_dir);
    kv("provider", provider);
    kv("fixture", fixture);
    kv("base_url", base_url);
    kv("model", model);
    kv("api_key_env", api_key_env);
    kv("retrieval", retrieval);
    kv("domain_noun", domain_noun);
    kv("top_k", std::to_string(top_k));
    kv("max_phases", std::to_string(max_phases));
    kv("retry_limit", std::to_string(retry_limit));
    kv("candidate_pool", std::to_string(candidate_pool));
    kv("parallelism", std::to_string(parallelism));
    kv("seed", std::to_string(seed));
    return s;
}

}  // namespace taira
