#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "scoreval/harness.hpp"

namespace scoreval {

namespace {

using nlohmann::json;

class http_chat_client final : public provider_client {
public:
    explicit http_chat_client(http_client_options opts) : opts_(std::move(opts)) {
        const char* key = std::getenv(opts_.api_key_env.c_str());
        if (!key || !*key)
            throw error(errc::provider_auth_error,
                        "environment variable " + opts_.api_key_env + " is not set");
        api_key_ = key;
    }

    completion_outcome complete(const scoring_request& req, const std::string& prompt,
                                const std::string&) override {
        json body;
        body["model"] = req.model_id;
        body["temperature"] = req.temperature;
        body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});

        httplib::Client cli(opts_.base_url);
        cli.set_connection_timeout(opts_.timeout_seconds);
        cli.set_read_timeout(opts_.timeout_seconds);
        cli.set_bearer_token_auth(api_key_);

        auto resp = cli.Post(opts_.path, body.dump(), "application/json");
        if (!resp)
            return {completion_outcome::status::transient_error, "",
                    "transport error: " + httplib::to_string(resp.error())};
        if (resp->status == 401 || resp->status == 403)
            return {completion_outcome::status::auth_error, "",
                    "provider rejected credentials (HTTP " + std::to_string(resp->status) + ")"};
        if (resp->status != 200)
            return {completion_outcome::status::transient_error, "",
                    "HTTP " + std::to_string(resp->status)};

        json obj = json::parse(resp->body, nullptr, false);
        if (obj.is_discarded())
            return {completion_outcome::status::transient_error, "", "unparseable provider reply"};
        try {
            return {completion_outcome::status::ok,
                    obj.at("choices").at(0).at("message").at("content").get<std::string>(), ""};
        } catch (const json::exception&) {
            return {completion_outcome::status::transient_error, "",
                    "provider reply missing choices[0].message.content"};
        }
    }

private:
    http_client_options opts_;
    std::string api_key_;
};

} // namespace

std::unique_ptr<provider_client> make_http_client(const http_client_options& opts) {
    return std::make_unique<http_chat_client>(opts);
}

} // namespace scoreval
