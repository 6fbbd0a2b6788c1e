// kgfacet: command-line access to every search-service capability.
//
// Each subcommand prints the same JSON body the HTTP API returns. Failures
// print the {code, message, detail} envelope on stderr and exit 1.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "kgfacet/comparison.hpp"
#include "kgfacet/http_server.hpp"
#include "kgfacet/kg_store.hpp"
#include "kgfacet/service.hpp"

namespace {

using nlohmann::json;
using namespace kgfacet;

struct GlobalOptions {
    std::string config;
    std::string dataset;
    std::string hierarchy;
    std::string provider_url;
    std::string journal;
    bool no_degrade = false;
    bool degrade = false;
};

ServiceConfig assemble_config(const GlobalOptions& g) {
    ServiceConfig c;
    if (!g.config.empty()) {
        c = ServiceConfig::load(g.config);
    } else {
        c.apply_env_overrides();
    }
    if (!g.dataset.empty()) c.dataset = g.dataset;
    if (!g.journal.empty()) c.journal = g.journal;
    if (!g.hierarchy.empty()) {
        c.hierarchy_fixture = g.hierarchy;
        c.provider_url.reset();
    }
    if (!g.provider_url.empty()) {
        c.provider_url = g.provider_url;
        c.hierarchy_fixture.reset();
    }
    if (g.no_degrade) c.degrade = false;
    if (g.degrade) c.degrade = true;
    return c;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::NotFound, "cannot read '" + path + "'", {{"path", path}});
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json ingest_summary(const std::string& path) {
    auto snap = ingest_file(path);
    json comparisons = json::array();
    for (const auto& c : build_problem_comparisons(snap)) {
        comparisons.push_back({{"id", c.id()}, {"label", c.label()}, {"row_count", c.rows().size()}});
    }
    return {{"revision", snap.revision()},
            {"papers", snap.papers().size()},
            {"contributions", snap.contributions().size()},
            {"properties", snap.property_labels().size()},
            {"comparisons", std::move(comparisons)}};
}

int serve(const ServiceConfig& config, const std::string& listen) {
    auto c = config;
    if (!listen.empty()) {
        auto colon = listen.rfind(':');
        if (colon == std::string::npos) throw Error(ErrorCode::InvalidConfig, "--listen expects host:port");
        c.listen_host = listen.substr(0, colon);
        c.listen_port = std::stoi(listen.substr(colon + 1));
    }
    auto service = SearchService::from_config(c);

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    HttpServer server(*service);
    int port = server.bind(c.listen_host, c.listen_port);
    if (port < 0) {
        throw Error(ErrorCode::InvalidConfig, "cannot listen on " + c.listen_host + ":" + std::to_string(c.listen_port));
    }
    std::cerr << json{{"listening", c.listen_host + ":" + std::to_string(port)}}.dump() << std::endl;

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    });
    server.run();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Faceted search over structured scholarly contributions"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config, "Service configuration (JSON)");
    app.add_option("--dataset", g.dataset, "Dataset file (JSON lines)");
    app.add_option("--hierarchy", g.hierarchy, "Hierarchy fixture file (JSON lines)");
    app.add_option("--provider-url", g.provider_url, "Remote hierarchy service base URL");
    app.add_option("--journal", g.journal, "Permalink journal file");
    app.add_flag("--no-degrade", g.no_degrade, "Fail with ProviderUnavailable instead of falling back");
    app.add_flag("--degrade", g.degrade, "Fall back to categorical labels when the provider is down");

    std::string file, comparison_id, property, level, prefix, filters_file, listen, permalink, external_id;
    std::vector<std::string> level_specs, ids;

    auto* ingest = app.add_subcommand("ingest", "Parse a dataset and summarise it");
    ingest->add_option("file", file)->required();

    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--listen", listen, "host:port");

    auto* comparisons = app.add_subcommand("comparisons", "List comparisons");

    auto* show = app.add_subcommand("show", "Print a comparison table");
    show->add_option("comparison", comparison_id)->required();

    auto* facets = app.add_subcommand("facets", "Infer facets of a comparison");
    facets->add_option("comparison", comparison_id)->required();

    auto* candidates = app.add_subcommand("candidates", "Auto-complete values of a facet");
    candidates->add_option("comparison", comparison_id)->required();
    candidates->add_option("property", property)->required();
    candidates->add_option("--prefix", prefix);

    auto* levels = app.add_subcommand("levels", "Group a taxonomic facet at a level");
    levels->add_option("comparison", comparison_id)->required();
    levels->add_option("property", property)->required();
    levels->add_option("level", level)->required();

    auto* filter = app.add_subcommand("filter", "Apply a filter set");
    filter->add_option("comparison", comparison_id)->required();
    filter->add_option("--filters", filters_file, "FilterSet JSON file")->required();
    filter->add_option("--level", level_specs, "property=level for taxonomic filters");

    auto* save = app.add_subcommand("save", "Save a filtered subset under a permalink");
    save->add_option("comparison", comparison_id)->required();
    save->add_option("--filters", filters_file, "FilterSet JSON file");
    save->add_option("--ids", ids, "Surviving ids (default: apply the filters)")->delimiter(',');

    auto* load = app.add_subcommand("load", "Load a saved permalink");
    load->add_option("permalink", permalink)->required();

    auto* resolve = app.add_subcommand("resolve", "Resolve the ancestor chain of an external entity");
    resolve->add_option("external_id", external_id)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        json out;
        if (*ingest) {
            out = ingest_summary(file);
        } else if (*serve_cmd) {
            return serve(assemble_config(g), listen);
        } else {
            auto service = SearchService::from_config(assemble_config(g));
            if (*comparisons) {
                out = service->list_comparisons();
            } else if (*show) {
                out = service->comparison(comparison_id);
            } else if (*facets) {
                out = service->facets(comparison_id);
            } else if (*candidates) {
                out = service->candidates(comparison_id, property, prefix);
            } else if (*levels) {
                out = service->facet_levels(comparison_id, property, level);
            } else if (*filter) {
                auto given = parse_body(read_file(filters_file));
                bool wrapped = given.is_object() && given.contains("filters") && given["filters"].is_object();
                json body = wrapped ? given : json{{"filters", given}};
                json lv = json::object();
                for (const auto& spec : level_specs) {
                    auto eq = spec.find('=');
                    if (eq == std::string::npos) throw Error(ErrorCode::InvalidRequest, "--level expects property=level");
                    lv[spec.substr(0, eq)] = spec.substr(eq + 1);
                }
                for (auto& [prop, name] : lv.items()) body["levels"][prop] = name;
                out = service->filter(comparison_id, body);
            } else if (*save) {
                if (assemble_config(g).journal.empty()) {
                    throw Error(ErrorCode::InvalidConfig, "save needs a permalink journal (--journal or config)");
                }
                json body = json::object();
                body["filters"] = filters_file.empty() ? json::object() : parse_body(read_file(filters_file));
                if (!ids.empty()) body["surviving_ids"] = ids;
                out = service->save(comparison_id, body);
            } else if (*load) {
                out = service->saved(permalink);
            } else if (*resolve) {
                out = service->resolve(external_id);
            }
        }
        std::cout << out.dump(2) << std::endl;
        return 0;
    } catch (const Error& e) {
        std::cerr << e.envelope().dump() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"code", "Internal"}, {"message", e.what()}, {"detail", nullptr}}.dump() << std::endl;
        return 1;
    }
}
