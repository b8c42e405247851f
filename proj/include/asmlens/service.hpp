#pragma once

// Session-based JSON API over loaded binaries. `Service::dispatch` is the
// transport-independent router; `serve` exposes it over HTTP under /api/v1.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "asmlens/layout.hpp"
#include "asmlens/mapping.hpp"
#include "asmlens/minimap.hpp"
#include "asmlens/model.hpp"

namespace asmlens::service {

using json = nlohmann::json;

inline constexpr std::size_t kDefaultPageSize = 200;

struct Options {
    std::size_t page_size = kDefaultPageSize;
    std::size_t minimap_budget = minimap::kDefaultBudget;
};

struct Response {
    int status = 200;
    json body;
};

// FNV-1a 64 of the canonical path, as 16 hex digits.
std::string binary_id_for(const std::string& canonical_path);

class Service {
public:
    explicit Service(Options options = {});
    ~Service();

    // Loads (or reuses) a binary. Returns its id. Throws Error.
    std::string load(const std::string& path, const std::vector<std::string>& source_roots = {});
    ModelPtr model(const std::string& binary_id) const;

    // Routes "GET /api/v1/..." style requests. Errors become 4xx responses
    // with {"error": {"kind", "message"}}.
    Response dispatch(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query = {}, const json& body = json::object());

private:
    struct Binary;
    struct Session;
    struct View;

    Options options_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Binary>> binaries_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::size_t next_session_ = 1;

    std::shared_ptr<Binary> binary(const std::string& id) const;
    std::shared_ptr<Session> session(const std::string& id) const;
    std::string create_session(const std::string& binary_id);

    json route(const std::string& method, const std::vector<std::string>& parts,
               const std::map<std::string, std::string>& query, const json& body, int& status);
    json session_json(const Session& s) const;
    json view_layout(Session& s, View& v, std::size_t offset, std::size_t limit);
    std::vector<minimap::RowInfo> minimap_rows(Session& s, View& v, std::optional<FileId> file,
                                               std::optional<std::size_t>& anchor);
    json view_minimap(Session& s, View& v, std::optional<FileId> file, std::size_t budget);
    json select(Session& s, const json& body);
    json jump(Session& s, View& v, const std::string& block);
    json seek(Session& s, View& v, const json& body);
};

// Blocks serving HTTP on host:port until the process is stopped.
void serve(Service& service, const std::string& host, int port);

}  // namespace asmlens::service
