#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace taira {

// key = value lines, '#' comments, ${VAR} expanded from the environment.
// The API key is never stored here; the HTTP provider reads the variable
// named by api_key_env.
struct Config {
    std::string catalog_dir = "store/catalog";
    std::string pattern_dir = "store/patterns";
    std::string search_corpus;
    std::string run_dir = "runs";
    std::string provider = "scripted";  // scripted | http
    std::string fixture;                // scripted rules; empty means offline responder only
    std::string base_url;
    std::string model;
    std::string api_key_env = "TAIRA_API_KEY";
    std::string retrieval = "bm25";  // bm25 | embedding
    std::string domain_noun = "clothing";
    std::int64_t top_k = 5;
    std::int64_t max_phases = 4;
    std::int64_t retry_limit = 3;
    std::int64_t candidate_pool = 50;
    std::int64_t parallelism = 4;
    std::int64_t seed = 42;

    void validate() const;  // throws ConfigError
    std::string serialize() const;
    bool operator==(const Config&) const = default;

    using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
    static Config parse(std::string_view text, const EnvLookup& env = {});
    // Relative paths in the file resolve against the file's directory.
    static Config load(const std::filesystem::path& path);

    // Overrides one key; the same rules as a file line.
    void set(const std::string& key, const std::string& value);
};

std::optional<std::string> process_env(const std::string& name);

}  // namespace taira
