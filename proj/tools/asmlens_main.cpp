// asmlens command-line driver: analyze, layout, serve.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "asmlens/error.hpp"
#include "asmlens/ingest.hpp"
#include "asmlens/layout.hpp"
#include "asmlens/serialize.hpp"
#include "asmlens/service.hpp"
#include "asmlens/stats.hpp"

namespace {

constexpr int kUsage = 2;
constexpr int kIngest = 3;

using namespace asmlens;

bool write_out(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return true;
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        std::cerr << "asmlens: cannot write " << path << "\n";
        return false;
    }
    return true;
}

std::shared_ptr<ProgramModel> load_or_report(const std::string& binary, const std::vector<std::string>& roots) {
    try {
        return ingest::load_binary(binary, roots);
    } catch (const Error& e) {
        std::cerr << "asmlens: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return nullptr;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"asmlens: loop-aware disassembly explorer"};
    app.require_subcommand(1);

    std::string binary, json_path, csv_path, function, mode = "memory", host = "127.0.0.1";
    std::vector<std::string> roots;
    int port = 8080;

    auto* analyze = app.add_subcommand("analyze", "Summarize a binary and its loop/mapping statistics");
    analyze->add_option("binary", binary, "ELF executable")->required();
    analyze->add_option("--source-root", roots, "Directory holding application sources (repeatable)");
    analyze->add_option("--json", json_path, "Write JSON here instead of stdout");
    analyze->add_option("--csv", csv_path, "Also write the block-size histogram as CSV");

    auto* layout_cmd = app.add_subcommand("layout", "Emit the block layout of one function");
    layout_cmd->add_option("binary", binary, "ELF executable")->required();
    layout_cmd->add_option("--function", function, "Function name")->required();
    layout_cmd->add_option("--mode", mode, "memory or loop")->check(CLI::IsMember({"memory", "loop"}));
    layout_cmd->add_option("--source-root", roots, "Directory holding application sources (repeatable)");
    layout_cmd->add_option("--json", json_path, "Write JSON here instead of stdout");

    auto* serve_cmd = app.add_subcommand("serve", "Serve the JSON API over HTTP");
    serve_cmd->add_option("binary", binary, "ELF executable")->required();
    serve_cmd->add_option("--port", port, "TCP port")->check(CLI::Range(1, 65535));
    serve_cmd->add_option("--host", host, "Listen address");
    serve_cmd->add_option("--source-root", roots, "Directory holding application sources (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kUsage;
    }

    try {
        if (*analyze) {
            auto model = load_or_report(binary, roots);
            if (!model) return kIngest;
            if (!write_out(json_path, json_out::dump(json_out::analysis(*model)))) return 1;
            if (!csv_path.empty() && !write_out(csv_path, stats::histogram_csv(stats::block_size_histogram(*model))))
                return 1;
            return 0;
        }
        if (*layout_cmd) {
            auto model = load_or_report(binary, roots);
            if (!model) return kIngest;
            auto f = model->find_function(function);
            if (!f) {
                std::cerr << "asmlens: UnknownFunction: no function named '" << function << "'\n";
                return kUsage;
            }
            auto plan = layout::build_layout(layout::function_view(*model, *f), *layout::parse_mode(mode));
            return write_out(json_path, json_out::dump(json_out::layout(*model, plan))) ? 0 : 1;
        }
        if (*serve_cmd) {
            service::Service svc;
            std::string id;
            try {
                id = svc.load(binary, roots);
            } catch (const Error& e) {
                std::cerr << "asmlens: " << to_string(e.kind()) << ": " << e.what() << "\n";
                return kIngest;
            }
            std::cout << "serving " << binary << " as binary " << id << " at http://" << host << ":" << port
                      << "/api/v1/" << std::endl;
            service::serve(svc, host, port);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "asmlens: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return 1;
    }
    return kUsage;
}
