#include <gtest/gtest.h>

#include <filesystem>

#include "whatif/building.hpp"
#include "whatif/service.hpp"

using namespace whatif;

namespace {

struct Call {
    int status;
    json body;
};

Call call(Service& s, std::string_view method, std::string_view path, const json& body = nullptr,
          std::map<std::string, std::string> query = {}) {
    const auto r = s.handle(method, path, query, body.is_null() ? "" : body.dump());
    return {r.status, r.content_type == "application/json" && !r.body.empty() ? json::parse(r.body) : json(r.body)};
}

// A JSON array of [from, to] pairs; brace lists of string pairs would
// otherwise become objects.
json pairs(std::initializer_list<std::pair<const char*, const char*>> edges) {
    json a = json::array();
    for (const auto& [x, y] : edges) a.push_back(json::array({x, y}));
    return a;
}

json height_cate_scenario() {
    return {{"treatment", "Height"},
            {"control", 3.0},
            {"treated", 3.2},
            {"conditions",
             {{"Ground_Floor_Area", 300},
              {"Number_of_Floors", 3},
              {"WWR", 0.3},
              {"u_Value_Roof", 0.2},
              {"u_Value_Ground_Floor", 0.2},
              {"Permeability", 7.5}}},
            {"n_samples", 300},
            {"seed", 1}};
}

}  // namespace

TEST(Service, HealthAndSchema) {
    Service s;
    EXPECT_EQ(call(s, "GET", "/health").body["status"], "ok");
    const auto r = call(s, "GET", "/schema");
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(r.body["schema"].size(), 17u);
    EXPECT_EQ(r.body["columns"].size(), 22u);
    EXPECT_EQ(s.handle("OPTIONS", "/graphs/g1/estimate", {}, "").status, 204);
    EXPECT_EQ(call(s, "GET", "/nowhere").status, 404);
}

TEST(Service, StatusCodes) {
    Service s;
    EXPECT_EQ(call(s, "GET", "/datasets/d9").status, 404);
    EXPECT_EQ(s.handle("POST", "/datasets", {}, "{not json").status, 422);
    EXPECT_EQ(call(s, "POST", "/datasets", {{"generate", {{"n", 100}, {"noise", 0.5}}}}).status, 422);
    EXPECT_EQ(call(s, "POST", "/graphs", {{"graph", {{"nodes", {"A", "B"}}, {"directed", pairs({{"A", "C"}})}}}}).status, 422);
    EXPECT_EQ(call(s, "GET", "/graphs/g1").status, 404);
}

TEST(Service, CsvUpload) {
    Service s;
    const auto r = call(s, "POST", "/datasets", {{"csv", "a,b\n1,2\n2,4\n3,6.5\n"}});
    ASSERT_EQ(r.status, 201);
    EXPECT_EQ(r.body["dataset_id"], "d1");
    EXPECT_EQ(r.body["summary"]["rows"], 3);
    EXPECT_EQ(r.body["summary"]["columns"][1]["max"], 6.5);
}

TEST(Service, FourStepWorkflow) {
    Service s;
    const auto d = call(s, "POST", "/datasets", {{"generate", {{"n", 1000}, {"seed", 1}}}});
    ASSERT_EQ(d.status, 201);
    const std::string did = d.body["dataset_id"];

    const auto disc = call(s, "POST", "/datasets/" + did + "/discover", json::object());
    ASSERT_EQ(disc.status, 201) << disc.body.dump();
    EXPECT_TRUE(disc.body.contains("operator_log"));
    EXPECT_TRUE(disc.body.contains("cpdag"));

    // Step 2 with the known structure uploaded directly.
    const auto up = call(s, "POST", "/graphs",
                         {{"graph", graph_to_json(raw_building_cpdag())}, {"dataset_id", did}});
    ASSERT_EQ(up.status, 201);
    const std::string raw = up.body["graph_id"];
    const json prune = {{"forbidden", pairs({{"External_Wall_Area", "Window_Area"}, {"Window_Area", "External_Wall_Area"}})}};
    const auto pr = call(s, "POST", "/graphs/" + raw + "/constraints", prune);
    ASSERT_EQ(pr.status, 201) << pr.body.dump();
    const std::string gid = pr.body["graph_id"];
    EXPECT_EQ(graph_from_json(pr.body["graph"]), ground_truth_dag());
    EXPECT_EQ(pr.body["parent_id"], raw);

    const auto hist = call(s, "GET", "/graphs/" + gid + "/history");
    ASSERT_EQ(hist.body["versions"].size(), 2u);
    EXPECT_EQ(hist.body["versions"][1]["graph_id"], raw);

    const auto dot = s.handle("GET", "/graphs/" + gid, {{"format", "dot"}}, "");
    EXPECT_EQ(dot.status, 200);
    EXPECT_EQ(dot.body.rfind("dag {", 0), 0u);

    const auto id = call(s, "POST", "/graphs/" + gid + "/identify", {{"treatment", "Window_Area"}});
    ASSERT_EQ(id.status, 200);
    EXPECT_EQ(id.body["minimal_adjustment_sets"][0],
              json({"Ground_Floor_Area", "Height", "Number_of_Floors", "WWR"}));

    const auto est = call(s, "POST", "/graphs/" + gid + "/estimate",
                          {{"scenario", height_cate_scenario()}, {"model_draws", 3}, {"baseline", true}});
    ASSERT_EQ(est.status, 200) << est.body.dump();
    EXPECT_EQ(est.body["kind"], "cate");
    std::size_t total = 0;
    for (const auto& c : est.body["estimate"]["histogram"]["counts"]) total += c.get<std::size_t>();
    EXPECT_EQ(total, 300u);
    ASSERT_TRUE(est.body.contains("oracle"));
    const double tau = est.body["estimate"]["tau"];
    const double truth = est.body["oracle"]["estimate"]["tau"];
    EXPECT_LT(std::abs(tau - truth) / truth, 0.15);
    EXPECT_TRUE(est.body.contains("baseline"));
}

TEST(Service, ContradictionIs409WithEdge) {
    Service s;
    CausalGraph g({"A", "B", "C"});
    g.add_directed("A", "B");
    g.add_undirected("B", "C");
    const auto up = call(s, "POST", "/graphs", {{"graph", graph_to_json(g)}});
    const auto r = call(s, "POST", "/graphs/g1/constraints", {{"required", pairs({{"B", "A"}})}});
    EXPECT_EQ(r.status, 409);
    EXPECT_TRUE(r.body.contains("edge"));
    EXPECT_EQ(call(s, "POST", "/graphs/g1/constraints", {{"bogus", 1}}).status, 422);
}

TEST(Service, EstimateNeedsADirectedGraphAndDataset) {
    Service s;
    call(s, "POST", "/graphs", {{"graph", graph_to_json(raw_building_cpdag())}});
    EXPECT_EQ(call(s, "POST", "/graphs/g1/estimate", {{"scenario", height_cate_scenario()}}).status, 422);
    EXPECT_EQ(call(s, "POST", "/graphs/g1/estimate", {{"scenario", height_cate_scenario()}, {"dataset_id", "d4"}}).status,
              404);
    EXPECT_EQ(call(s, "POST", "/graphs/g1/estimate", json::object()).status, 422);
}

TEST(Service, PersistenceSurvivesRestart) {
    const auto path = std::filesystem::temp_directory_path() / "whatif_service_test.json";
    std::filesystem::remove(path);
    {
        Service s(ServiceOptions{path});
        call(s, "POST", "/datasets", {{"generate", {{"n", 60}, {"seed", 4}}}});
        call(s, "POST", "/datasets", {{"csv", "a,b\n1,2\n2,3\n"}});
        call(s, "POST", "/graphs", {{"graph", graph_to_json(raw_building_cpdag())}, {"dataset_id", "d1"}});
        call(s, "POST", "/graphs/g1/constraints",
             {{"forbidden", pairs({{"External_Wall_Area", "Window_Area"}, {"Window_Area", "External_Wall_Area"}})}});
    }
    Service t(ServiceOptions{path});
    EXPECT_EQ(*t.dataset("d1")->data, generate_dataset(default_schema(), 60, 4));
    EXPECT_EQ(t.dataset("d2")->data->rows(), 2u);
    EXPECT_EQ(t.graph("g2")->graph, ground_truth_dag());
    EXPECT_EQ(t.graph("g2")->parent, "g1");
    EXPECT_EQ(call(t, "POST", "/graphs", {{"graph", graph_to_json(ground_truth_dag())}}).body["graph_id"], "g3");
    std::filesystem::remove(path);
}
