#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "whatif/serialize.hpp"

namespace whatif {

struct Response {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;

    static Response json_body(int status, const json& j);
};

/// How a stored dataset came about; generated datasets can be rebuilt from
/// their parameters and validated against the oracle.
struct DatasetRecord {
    std::shared_ptr<const Dataset> data;
    bool generated = false;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double noise = 0;
    std::vector<ParameterSpec> schema;
    OracleConstants constants;
    std::string csv;  // source text of uploaded datasets
};

/// Graphs are immutable; an edit stores a new id whose `parent` is the
/// edited version.
struct GraphRecord {
    CausalGraph graph;
    std::string parent;
    std::string dataset;
    std::string origin;  // "discover" | "upload" | "constraints"
    json detail;         // discovery report or applied constraints
};

struct ServiceOptions {
    /// Snapshot file rewritten after every mutation and read at startup.
    std::optional<std::filesystem::path> persist;
};

/// Request dispatcher behind the HTTP server. Thread-safe: reads share a
/// lock on the store, mutations take it exclusively only to insert the
/// finished record.
class Service {
public:
    explicit Service(ServiceOptions options = {});

    Response handle(std::string_view method, std::string_view path, const std::map<std::string, std::string>& query,
                    std::string_view body);

    std::shared_ptr<const DatasetRecord> dataset(const std::string& id) const;
    std::shared_ptr<const GraphRecord> graph(const std::string& id) const;

private:
    json post_dataset(const json& body);
    json discover(const std::string& id, const json& body);
    json post_graph(const json& body);
    json constrain(const std::string& id, const json& body);
    json identify(const std::string& id, const json& body) const;
    json estimate(const std::string& id, const json& body) const;
    json graph_json(const std::string& id, const std::shared_ptr<const GraphRecord>& g) const;
    json history(const std::string& id) const;

    std::string add_dataset(std::shared_ptr<const DatasetRecord> rec);
    std::string add_graph(std::shared_ptr<const GraphRecord> rec);
    void save() const;
    void load(const std::filesystem::path& path);

    ServiceOptions options_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::shared_ptr<const DatasetRecord>> datasets_;
    std::map<std::string, std::shared_ptr<const GraphRecord>> graphs_;
    std::size_t next_dataset_ = 1;
    std::size_t next_graph_ = 1;
};

/// Summary statistics per column: min, max, mean, sd.
json dataset_summary(const Dataset& ds);

}  // namespace whatif
