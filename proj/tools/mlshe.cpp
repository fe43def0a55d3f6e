#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "mlshe/experiments.hpp"

namespace {

void list_experiments() {
    const auto& reg = mlshe::experiment_registry();
    for (const auto& [name, info] : reg) {
        std::printf("%-18s %s\n", name.c_str(), info.description.c_str());
        for (const auto& [key, entry] : info.schema.items()) {
            const std::string def = entry.at("default").is_null() ? "null" : entry.at("default").dump();
            std::printf("    --%-16s %-8s default %-12s %s\n", key.c_str(),
                        entry.at("type").get<std::string>().c_str(), def.c_str(),
                        entry.at("doc").get<std::string>().c_str());
        }
    }
}

std::string default_out_root() {
    const char* env = std::getenv("MLSHE_OUT_ROOT");
    return env ? env : "mlshe-out";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the multi-layer stochastic heat equation"};
    app.footer("run 'mlshe list-experiments' for the registry and per-experiment parameters");

    std::string experiment;
    std::string config_path;
    std::string out_dir;
    long seed = -1;
    int workers = -1;
    bool strict_reduce = false;

    app.add_option("experiment", experiment, "experiment kind, or 'list-experiments'")->required();
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed, "override the base seed");
    app.add_option("--workers", workers, "override the worker count (0 = all cores)");
    app.add_option("--out", out_dir, "output directory (default <MLSHE_OUT_ROOT>/<experiment>)");
    app.add_flag("--strict-reduce", strict_reduce,
                 "force sequential reduction (reductions are index-ordered already)");
    app.allow_extras(); // simple --key value overrides for schema parameters

    CLI11_PARSE(app, argc, argv);

    if (experiment == "list-experiments") {
        list_experiments();
        return 0;
    }

    try {
        mlshe::json config = mlshe::json::object();
        if (!config_path.empty()) config = mlshe::read_json(config_path);

        // apply --key value extras against the schema
        const auto extras = app.remaining();
        for (std::size_t i = 0; i < extras.size(); ++i) {
            std::string key = extras[i];
            if (key.rfind("--", 0) != 0 || i + 1 >= extras.size())
                throw std::invalid_argument("unrecognized argument '" + key + "'");
            key = key.substr(2);
            const std::string& value = extras[++i];
            mlshe::json parsed;
            try {
                parsed = mlshe::json::parse(value);
            } catch (...) {
                parsed = value; // plain string
            }
            config[key] = parsed;
        }
        if (seed >= 0) config["seed"] = seed;
        if (workers >= 0) config["workers"] = workers;
        if (strict_reduce) config["strict_reduce"] = true;
        if (out_dir.empty()) out_dir = default_out_root() + "/" + experiment;

        const mlshe::json summary = mlshe::run_experiment(experiment, config, out_dir);
        std::printf("%s\n", summary.dump(2).c_str());
        if (experiment == "acceptance-suite" && !summary.at("all_passed").get<bool>()) return 1;
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "mlshe: %s\n", e.what());
        return 2;
    }
}
