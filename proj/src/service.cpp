#include "asmlens/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "asmlens/annotate.hpp"
#include "asmlens/error.hpp"
#include "asmlens/ingest.hpp"
#include "asmlens/serialize.hpp"

namespace asmlens::service {

namespace fs = std::filesystem;
using layout::OrderingMode;

std::string binary_id_for(const std::string& canonical_path) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_path) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------

namespace {

struct ProgramRow {
    BlockId block;
    bool pseudo = false;
    int indent = 0;
    FunctionId function;
};

struct ProgramRows {
    std::vector<ProgramRow> rows;
    std::vector<std::size_t> function_start;  // first row of each function
};

}  // namespace

struct Service::Binary {
    std::string id;
    ModelPtr model;
    std::vector<char> application;                 // per block
    std::vector<std::vector<FileId>> block_files;  // per block, sorted

    std::mutex mutex;
    std::map<std::pair<std::uint32_t, int>, std::shared_ptr<const layout::LayoutPlan>> plans;
    std::map<int, std::shared_ptr<const ProgramRows>> program_rows;

    std::shared_ptr<const layout::LayoutPlan> plan(FunctionId f, OrderingMode mode) {
        std::lock_guard lock(mutex);
        auto key = std::make_pair(f.value, static_cast<int>(mode));
        if (auto it = plans.find(key); it != plans.end()) return it->second;
        auto p = std::make_shared<const layout::LayoutPlan>(
            layout::build_layout(layout::function_view(*model, f), mode));
        plans.emplace(key, p);
        return p;
    }

    std::shared_ptr<const ProgramRows> rows(OrderingMode mode) {
        {
            std::lock_guard lock(mutex);
            if (auto it = program_rows.find(static_cast<int>(mode)); it != program_rows.end()) return it->second;
        }
        auto out = std::make_shared<ProgramRows>();
        for (const auto& f : model->functions) {
            out->function_start.push_back(out->rows.size());
            auto p = plan(f.function_id, mode);
            for (const auto& r : p->rows)
                out->rows.push_back({r.block_id, r.kind == layout::RowKind::PseudoBlock, r.indent, f.function_id});
        }
        std::lock_guard lock(mutex);
        program_rows.emplace(static_cast<int>(mode), out);
        return out;
    }
};

struct Service::View {
    int view_id = 0;
    int color_id = 0;
    OrderingMode mode = OrderingMode::MemoryAddress;
    FunctionId function;
};

struct Service::Session {
    std::string id;
    std::string binary_id;
    std::mutex mutex;
    std::map<int, View> views;
    std::optional<int> active_view;
    std::map<int, mapping::HighlightSet> highlights;  // by color
    int next_view = 1;
};

Service::Service(Options options) : options_(options) {}
Service::~Service() = default;

std::string Service::load(const std::string& path, const std::vector<std::string>& source_roots) {
    std::error_code ec;
    if (!fs::exists(path, ec)) throw Error(ErrorKind::UnreadableFile, "no such file: " + path);
    std::string canonical = fs::weakly_canonical(path, ec).string();
    if (ec) canonical = path;
    std::string id = binary_id_for(canonical);
    {
        std::lock_guard lock(mutex_);
        if (binaries_.count(id)) return id;
    }
    auto model = ingest::load_binary(path, source_roots);
    auto b = std::make_shared<Binary>();
    b->id = id;
    b->application.assign(model->blocks.size(), 0);
    b->block_files.resize(model->blocks.size());
    for (const auto& blk : model->blocks) {
        std::set<FileId> files;
        for (Address a : blk.instruction_addresses)
            for (const auto& m : model->mappings_for(a)) files.insert(m.file_id);
        for (FileId f : files)
            if (model->files[f.value].is_application_code) b->application[blk.block_id.value] = 1;
        b->block_files[blk.block_id.value].assign(files.begin(), files.end());
    }
    b->model = std::move(model);
    std::lock_guard lock(mutex_);
    binaries_.emplace(id, b);
    return id;
}

ModelPtr Service::model(const std::string& binary_id) const { return binary(binary_id)->model; }

std::shared_ptr<Service::Binary> Service::binary(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = binaries_.find(id);
    if (it == binaries_.end()) throw Error(ErrorKind::UnknownBinary, "unknown binary id " + id);
    return it->second;
}

std::shared_ptr<Service::Session> Service::session(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorKind::UnknownSession, "unknown session " + id);
    return it->second;
}

std::string Service::create_session(const std::string& binary_id) {
    binary(binary_id);
    auto s = std::make_shared<Session>();
    s->binary_id = binary_id;
    std::lock_guard lock(mutex_);
    s->id = "s" + std::to_string(next_session_++);
    sessions_.emplace(s->id, s);
    return s->id;
}

// ---------------------------------------------------------------------------

namespace {

int status_for(ErrorKind k) {
    switch (k) {
    case ErrorKind::UnknownFile:
    case ErrorKind::UnknownAddress:
    case ErrorKind::UnknownFunction:
    case ErrorKind::UnknownBlock:
    case ErrorKind::UnknownView:
    case ErrorKind::UnknownSession:
    case ErrorKind::UnknownBinary:
    case ErrorKind::NoFurtherHighlight: return 404;
    case ErrorKind::NotAnExecutable:
    case ErrorKind::NoDebugInfo:
    case ErrorKind::UnreadableFile:
    case ErrorKind::MalformedDebugInfo: return 422;
    default: return 400;
    }
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path.substr(0, path.find('?'))) {
        if (c == '/') {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

std::optional<std::string> param(const std::map<std::string, std::string>& q, const json& body, const std::string& key) {
    if (auto it = q.find(key); it != q.end()) return it->second;
    if (body.is_object() && body.contains(key) && !body[key].is_null()) {
        const auto& v = body[key];
        return v.is_string() ? v.get<std::string>() : v.dump();
    }
    return std::nullopt;
}

std::size_t to_size(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size() || v < 0) throw std::invalid_argument(s);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw Error(ErrorKind::BadRequest, std::string("invalid ") + what + " '" + s + "'");
    }
}

OrderingMode mode_of(const std::optional<std::string>& s) {
    if (!s) return OrderingMode::MemoryAddress;
    auto m = layout::parse_mode(*s);
    if (!m) throw Error(ErrorKind::BadRequest, "mode must be 'memory' or 'loop'");
    return *m;
}

FunctionId resolve_function(const ProgramModel& model, const std::optional<std::string>& name,
                            const std::optional<std::string>& address) {
    if (name) {
        if (name->empty()) throw Error(ErrorKind::UnknownFunction, "empty function name");
        if (auto f = model.find_function(*name)) return *f;
        throw Error(ErrorKind::UnknownFunction, "unknown function '" + *name + "'");
    }
    if (address) {
        Address a = json_out::parse_address(json(*address));
        if (const auto* f = model.function_containing(a)) return f->function_id;
        throw Error(ErrorKind::UnknownFunction, "no function contains " + *address);
    }
    throw Error(ErrorKind::BadRequest, "function or address required");
}

BlockId resolve_block(const ProgramModel& model, const std::string& text) {
    auto b = parse_block_id(text);
    if (!b || b->value >= model.blocks.size()) throw Error(ErrorKind::UnknownBlock, "unknown block '" + text + "'");
    return *b;
}

std::size_t real_row_of(const layout::LayoutPlan& plan, BlockId b) {
    for (const auto& r : plan.rows)
        if (r.kind == layout::RowKind::RealBlock && r.block_id == b) return r.order_index;
    throw Error(ErrorKind::UnknownBlock, to_string(b) + " is not in this layout");
}

}  // namespace

Response Service::dispatch(const std::string& method, const std::string& path,
                           const std::map<std::string, std::string>& query, const json& body) {
    Response r;
    try {
        auto parts = split_path(path);
        if (parts.size() < 2 || parts[0] != "api" || parts[1] != "v1")
            throw Error(ErrorKind::BadRequest, "paths live under /api/v1");
        parts.erase(parts.begin(), parts.begin() + 2);
        r.body = route(method, parts, query, body, r.status);
    } catch (const Error& e) {
        r.status = status_for(e.kind());
        r.body = {{"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}};
    } catch (const json::exception& e) {
        r.status = 400;
        r.body = {{"error", {{"kind", "BadRequest"}, {"message", e.what()}}}};
    }
    return r;
}

json Service::session_json(const Session& s) const {
    json views = json::array();
    for (const auto& [id, v] : s.views)
        views.push_back({{"view_id", id},
                         {"color_id", v.color_id},
                         {"ordering_mode", layout::to_string(v.mode)},
                         {"function_id", v.function.value}});
    json highlights = json::array();
    for (const auto& [c, h] : s.highlights) highlights.push_back(json_out::highlight(h));
    return {{"session_id", s.id},
            {"binary_id", s.binary_id},
            {"views", views},
            {"active_view", s.active_view ? json(*s.active_view) : json(nullptr)},
            {"highlights", highlights}};
}

json Service::route(const std::string& method, const std::vector<std::string>& p,
                    const std::map<std::string, std::string>& q, const json& body, int& status) {
    auto is = [&](const char* m, std::size_t n) { return method == m && p.size() == n; };
    auto bad_route = [&]() -> json { throw Error(ErrorKind::BadRequest, "no route for " + method); };

    if (p.empty()) return bad_route();

    if (p[0] == "health" && is("GET", 1)) return {{"status", "ok"}};

    if (p[0] == "load" && is("POST", 1)) {
        auto path = param(q, body, "path");
        if (!path) throw Error(ErrorKind::BadRequest, "path required");
        std::vector<std::string> roots;
        if (body.contains("source_roots")) roots = body["source_roots"].get<std::vector<std::string>>();
        if (auto it = q.find("source_root"); it != q.end()) roots.push_back(it->second);
        std::string id = load(*path, roots);
        std::string sid;
        if (auto s = param(q, body, "session_id")) {
            auto sess = session(*s);
            std::lock_guard lock(sess->mutex);
            if (sess->binary_id != id) {
                sess->binary_id = id;
                sess->views.clear();
                sess->highlights.clear();
                sess->active_view.reset();
            }
            sid = *s;
        } else {
            sid = create_session(id);
        }
        return {{"binary_id", id}, {"session_id", sid}, {"summary", json_out::summary(*binary(id)->model)}};
    }

    if (p[0] == "tooltips" && is("GET", 2)) {
        auto t = annotate::tooltip(p[1]);
        if (!t) throw Error(ErrorKind::BadRequest, "no tooltip for '" + p[1] + "'");
        return json_out::tooltip(*t);
    }

    if (p[0] == "binaries" && p.size() >= 3 && method == "GET") {
        auto b = binary(p[1]);
        const auto& m = *b->model;
        const std::string& what = p[2];
        if (what == "summary" && p.size() == 3) return json_out::summary(m);
        if (what == "analysis" && p.size() == 3) return json_out::analysis(m);
        if (what == "functions" && p.size() == 3) {
            json out = json::array();
            for (const auto& f : m.functions)
                out.push_back({{"function_id", f.function_id.value},
                               {"name", f.name},
                               {"entry_address", json_out::hex(f.entry_address)},
                               {"loops", m.loops(f.function_id).loops.size()}});
            return out;
        }
        if (what == "layout" && p.size() == 3) {
            auto f = resolve_function(m, param(q, body, "function"), param(q, body, "address"));
            auto mode = mode_of(param(q, body, "mode"));
            auto plan = b->plan(f, mode);
            std::size_t limit = options_.page_size;
            if (auto l = param(q, body, "limit")) limit = to_size(*l, "limit");
            std::size_t offset = 0;
            if (auto o = param(q, body, "offset")) offset = to_size(*o, "offset");
            if (auto a = param(q, body, "anchor")) offset = real_row_of(*plan, resolve_block(m, *a));
            return json_out::layout(m, *plan, offset, limit);
        }
        if (what == "tree" && p.size() == 3) {
            std::vector<mapping::HighlightSet> hs;
            if (auto sid = param(q, body, "session")) {
                auto s = session(*sid);
                std::lock_guard lock(s->mutex);
                for (const auto& [c, h] : s->highlights) hs.push_back(h);
            }
            return json_out::file_tree(mapping::files_for_highlight(m, hs));
        }
        if (what == "files" && p.size() == 4) return json_out::source_file(m, FileId{static_cast<std::uint32_t>(to_size(p[3], "file id"))});
        return bad_route();
    }

    if (p[0] == "sessions") {
        if (is("POST", 1)) {
            auto bid = param(q, body, "binary_id");
            if (!bid) throw Error(ErrorKind::BadRequest, "binary_id required");
            status = 201;
            auto s = session(create_session(*bid));
            std::lock_guard lock(s->mutex);
            return session_json(*s);
        }
        if (p.size() < 2) return bad_route();
        auto s = session(p[1]);
        std::lock_guard lock(s->mutex);
        if (is("GET", 2)) return session_json(*s);
        if (p.size() >= 3 && p[2] == "select" && is("POST", 3)) return select(*s, body);
        if (p.size() >= 3 && p[2] == "views") {
            if (is("POST", 3)) {
                const auto& m = *binary(s->binary_id)->model;
                View v;
                v.view_id = s->next_view++;
                std::set<int> used;
                for (const auto& [id, other] : s->views) used.insert(other.color_id);
                while (used.count(v.color_id)) ++v.color_id;
                v.mode = mode_of(param(q, body, "mode"));
                auto fname = param(q, body, "function");
                auto faddr = param(q, body, "address");
                if (fname || faddr) v.function = resolve_function(m, fname, faddr);
                s->views.emplace(v.view_id, v);
                s->active_view = v.view_id;
                status = 201;
                return {{"view_id", v.view_id}, {"color_id", v.color_id}, {"ordering_mode", layout::to_string(v.mode)}};
            }
            if (p.size() < 4) return bad_route();
            auto it = s->views.find(static_cast<int>(to_size(p[3], "view id")));
            if (it == s->views.end()) throw Error(ErrorKind::UnknownView, "unknown view " + p[3]);
            View& v = it->second;
            if (is("DELETE", 4)) {
                s->highlights.erase(v.color_id);
                s->views.erase(it);
                if (s->active_view && !s->views.count(*s->active_view))
                    s->active_view = s->views.empty() ? std::nullopt : std::optional<int>(s->views.rbegin()->first);
                return session_json(*s);
            }
            if (p.size() != 5) return bad_route();
            const std::string& what = p[4];
            if (what == "activate" && method == "POST") {
                s->active_view = v.view_id;
                return session_json(*s);
            }
            if (what == "mode" && method == "POST") {
                v.mode = mode_of(param(q, body, "mode"));
                return {{"view_id", v.view_id}, {"ordering_mode", layout::to_string(v.mode)}};
            }
            if (what == "layout" && method == "GET") {
                std::size_t limit = options_.page_size, offset = 0;
                if (auto l = param(q, body, "limit")) limit = to_size(*l, "limit");
                if (auto o = param(q, body, "offset")) offset = to_size(*o, "offset");
                return view_layout(*s, v, offset, limit);
            }
            if (what == "minimap" && method == "GET") {
                std::optional<FileId> file;
                if (auto f = param(q, body, "file_id")) file = FileId{static_cast<std::uint32_t>(to_size(*f, "file id"))};
                std::size_t budget = options_.minimap_budget;
                if (auto bu = param(q, body, "budget")) budget = to_size(*bu, "budget");
                return view_minimap(*s, v, file, budget);
            }
            if (what == "jump" && method == "POST") {
                auto blk = param(q, body, "block_id");
                if (!blk) throw Error(ErrorKind::BadRequest, "block_id required");
                return jump(*s, v, *blk);
            }
            if (what == "seek" && method == "POST") return seek(*s, v, body.is_object() ? body : json::object());
            if (what == "highlight" && method == "DELETE") {
                s->highlights.erase(v.color_id);
                return session_json(*s);
            }
        }
    }
    return bad_route();
}

json Service::view_layout(Session& s, View& v, std::size_t offset, std::size_t limit) {
    auto b = binary(s.binary_id);
    if (b->model->functions.empty()) throw Error(ErrorKind::UnknownFunction, "binary has no functions");
    auto plan = b->plan(v.function, v.mode);
    json j = json_out::layout(*b->model, *plan, offset, limit);
    j["view_id"] = v.view_id;
    j["color_id"] = v.color_id;
    return j;
}

std::vector<minimap::RowInfo> Service::minimap_rows(Session& s, View& v, std::optional<FileId> file,
                                                    std::optional<std::size_t>& anchor) {
    auto b = binary(s.binary_id);
    const auto& m = *b->model;
    if (file && file->value >= m.files.size())
        throw Error(ErrorKind::UnknownFile, "unknown file id " + std::to_string(file->value));
    auto rows = b->rows(v.mode);

    // Lowest highlight color touching each block.
    std::map<BlockId, int> color;
    for (const auto& [c, h] : s.highlights)
        for (Address a : h.instruction_addresses)
            if (const auto* blk = m.block_containing(a)) {
                auto [it, ins] = color.emplace(blk->block_id, c);
                if (!ins) it->second = std::min(it->second, c);
            }

    std::vector<minimap::RowInfo> info;
    info.reserve(rows->rows.size());
    for (const auto& r : rows->rows) {
        minimap::RowInfo ri;
        ri.block_id = r.block;
        ri.pseudo = r.pseudo;
        ri.indent = r.indent;
        ri.instruction_count = m.block(r.block).instruction_addresses.size();
        ri.application = b->application[r.block.value];
        if (auto it = color.find(r.block); it != color.end()) ri.highlight_color = it->second;
        const auto& files = b->block_files[r.block.value];
        ri.matches_filter = file ? std::binary_search(files.begin(), files.end(), *file) : r.function == v.function;
        info.push_back(ri);
    }
    anchor.reset();
    if (v.function.value < rows->function_start.size()) anchor = rows->function_start[v.function.value];
    return info;
}

json Service::view_minimap(Session& s, View& v, std::optional<FileId> file, std::size_t budget) {
    std::optional<std::size_t> anchor;
    auto info = minimap_rows(s, v, file, anchor);
    json j = json_out::minimap(minimap::build_minimap(info, budget, anchor));
    j["view_id"] = v.view_id;
    j["ordering_mode"] = layout::to_string(v.mode);
    return j;
}

json Service::select(Session& s, const json& body) {
    const auto& m = *binary(s.binary_id)->model;
    int view_id = 0;
    if (body.contains("view_id")) view_id = body["view_id"].get<int>();
    else if (s.active_view) view_id = *s.active_view;
    else throw Error(ErrorKind::UnknownView, "no active view");
    auto it = s.views.find(view_id);
    if (it == s.views.end()) throw Error(ErrorKind::UnknownView, "unknown view " + std::to_string(view_id));
    int color = it->second.color_id;

    mapping::HighlightSet h;
    if (body.contains("file_id")) {
        FileId f{body["file_id"].get<std::uint32_t>()};
        auto first = body.value("first_line", 0u);
        auto last = body.value("last_line", first);
        if (first == 0 || last < first) throw Error(ErrorKind::BadRequest, "need 1 <= first_line <= last_line");
        h = mapping::highlight_from_source(m, color, f, first, last);
    } else if (body.contains("addresses")) {
        std::set<Address> addrs;
        for (const auto& a : body["addresses"]) addrs.insert(json_out::parse_address(a));
        h = mapping::highlight_from_instructions(m, color, addrs);
    } else if (body.contains("first_address")) {
        Address lo = json_out::parse_address(body["first_address"]);
        Address hi = body.contains("last_address") ? json_out::parse_address(body["last_address"]) : lo;
        std::set<Address> addrs;
        auto i = std::lower_bound(m.instructions.begin(), m.instructions.end(), lo,
                                  [](const Instruction& x, Address a) { return x.address < a; });
        for (; i != m.instructions.end() && i->address <= hi; ++i) addrs.insert(i->address);
        h = mapping::highlight_from_instructions(m, color, addrs);
    } else {
        throw Error(ErrorKind::BadRequest, "select needs file_id/first_line, addresses or first_address");
    }
    s.highlights[color] = h;
    json j = json_out::highlight(h);
    j["view_id"] = view_id;
    if (auto t = h.scroll_target())
        if (const auto* blk = m.block_containing(*t)) j["scroll_block"] = to_string(blk->block_id);
    return j;
}

json Service::jump(Session& s, View& v, const std::string& block) {
    auto b = binary(s.binary_id);
    const auto& m = *b->model;
    BlockId target = resolve_block(m, block);
    v.function = m.block(target).function_id;
    auto plan = b->plan(v.function, v.mode);
    std::size_t row = real_row_of(*plan, target);
    json j = json_out::layout(m, *plan, row, options_.page_size);
    j["view_id"] = v.view_id;
    j["target_block"] = to_string(target);
    j["target_row"] = row;
    return j;
}

json Service::seek(Session& s, View& v, const json& body) {
    std::string dir = body.value("direction", std::string("below"));
    if (dir != "above" && dir != "below") throw Error(ErrorKind::BadRequest, "direction must be above or below");
    std::optional<FileId> file;
    if (body.contains("file_id")) file = FileId{body["file_id"].get<std::uint32_t>()};
    std::size_t budget = body.value("budget", options_.minimap_budget);

    std::optional<std::size_t> anchor;
    auto info = minimap_rows(s, v, file, anchor);
    auto window = minimap::build_minimap(info, budget, anchor);
    BlockId target = minimap::seek(info, window, dir == "above" ? minimap::Direction::Above : minimap::Direction::Below);
    return jump(s, v, to_string(target));
}

// ---------------------------------------------------------------------------

void serve(Service& service, const std::string& host, int port) {
    httplib::Server server;
    auto handler = [&service](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query;
        for (const auto& [k, v] : req.params) query[k] = v;
        json body = json::object();
        if (!req.body.empty()) {
            body = json::parse(req.body, nullptr, false);
            if (body.is_discarded()) {
                res.status = 400;
                res.set_content(R"({"error":{"kind":"BadRequest","message":"body is not JSON"}})", "application/json");
                return;
            }
        }
        auto r = service.dispatch(req.method, req.path, query, body);
        res.status = r.status;
        res.set_content(json_out::dump(r.body), "application/json");
    };
    const char* pattern = R"(/api/v1/.*)";
    server.Get(pattern, handler);
    server.Post(pattern, handler);
    server.Delete(pattern, handler);
    if (!server.listen(host, port)) throw Error(ErrorKind::BadRequest, "cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace asmlens::service
