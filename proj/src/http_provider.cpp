#include "taira/errors.hpp"
#include "taira/llm.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <thread>

namespace taira {

using nlohmann::json;

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw LlmError("http provider needs a base_url");
    if (config_.model.empty()) throw LlmError("http provider needs a model name");
    if (config_.transport_retries < 0) throw LlmError("negative retry budget");
}

json HttpProvider::request_body(const HttpProviderConfig& config, const ChatRequest& request) {
    return {{"model", config.model},
            {"messages",
             json::array({{{"role", "system"}, {"content", request.system_prompt}},
                          {{"role", "user"}, {"content", request.user_prompt}}})},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens}};
}

ChatReply HttpProvider::parse_response(const std::string& body) {
    auto doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw LlmError("chat-completions response is not JSON");
    try {
        ChatReply reply;
        reply.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        if (auto u = doc.find("usage"); u != doc.end() && u->is_object()) {
            if (u->contains("prompt_tokens")) reply.prompt_tokens = u->at("prompt_tokens").get<std::int64_t>();
            if (u->contains("completion_tokens"))
                reply.completion_tokens = u->at("completion_tokens").get<std::int64_t>();
        }
        return reply;
    } catch (const json::exception& e) {
        throw LlmError(std::string("unexpected chat-completions response shape: ") + e.what());
    }
}

ChatReply HttpProvider::complete(const ChatRequest& request) {
    const std::string body = request_body(config_, request).dump();
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);

    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    std::string last_error;
    auto delay = config_.backoff;
    for (int attempt = 0; attempt <= config_.transport_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
        auto res = client.Post("/v1/chat/completions", headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
        } else if (res->status == 200) {
            return parse_response(res->body);
        } else if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
        } else {
            throw LlmError("chat-completions request rejected with HTTP " + std::to_string(res->status) + ": " +
                           res->body.substr(0, 200));
        }
        spdlog::warn("chat-completions attempt {} failed: {}", attempt + 1, last_error);
    }
    throw LlmError("chat-completions failed after " + std::to_string(config_.transport_retries) +
                   " retries: " + last_error);
}

}  // namespace taira
