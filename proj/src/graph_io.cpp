#include <algorithm>
#include <cctype>
#include <sstream>

#include "whatif/error.hpp"
#include "whatif/graph.hpp"
#include "whatif/serialize.hpp"

namespace whatif {

namespace {

bool bare_id(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
    return true;
}

std::string dot_id(const std::string& s) {
    if (bare_id(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string to_dot(const CausalGraph& g) {
    std::ostringstream os;
    os << (g.fully_directed() ? "dag" : "pdag") << " {\n";
    for (const auto& n : g.nodes()) os << dot_id(n) << "\n";
    for (const auto& [a, b] : g.directed_edges()) os << dot_id(a) << " -> " << dot_id(b) << "\n";
    for (const auto& [a, b] : g.undirected_edges()) os << dot_id(a) << " -- " << dot_id(b) << "\n";
    os << "}\n";
    return os.str();
}

// Minimal reader for the DAGitty/DOT subset written above: node
// statements, `->`, `<-` and `--` edges, optional `;` and `[...]` blocks.
class DotReader {
public:
    explicit DotReader(std::string_view text) : text_(text) {}

    CausalGraph read() {
        std::string kw = next();
        if (kw == "strict") kw = next();
        if (kw != "dag" && kw != "pdag" && kw != "digraph" && kw != "graph")
            throw ValidationError("DOT: expected dag/pdag/digraph/graph, got '" + kw + "'");
        std::string tok = next();
        if (tok != "{") tok = next();
        if (tok != "{") throw ValidationError("DOT: expected '{'");

        std::vector<std::string> nodes;
        struct Pending { std::string a, op, b; };
        std::vector<Pending> edges;
        auto note = [&](const std::string& n) {
            if (std::find(nodes.begin(), nodes.end(), n) == nodes.end()) nodes.push_back(n);
        };
        for (;;) {
            tok = next();
            if (tok.empty()) throw ValidationError("DOT: unexpected end of input");
            if (tok == "}") break;
            if (tok == ";") continue;
            if (tok == "[") {
                skip_attributes();
                continue;
            }
            note(tok);
            std::string lhs = tok;
            while (peek_op()) {
                std::string op = next();
                std::string rhs = next();
                if (rhs.empty() || rhs == "}" || rhs == ";") throw ValidationError("DOT: edge without target");
                note(rhs);
                edges.push_back({lhs, op, rhs});
                lhs = rhs;
            }
        }
        CausalGraph g(nodes);
        for (const auto& e : edges) {
            if (e.op == "->") g.add_directed(e.a, e.b);
            else if (e.op == "<-") g.add_directed(e.b, e.a);
            else g.add_undirected(e.a, e.b);
        }
        return g;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size()) {
            if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            } else if (text_.substr(pos_, 2) == "//" || text_[pos_] == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    bool peek_op() {
        skip_ws();
        auto two = text_.substr(pos_, 2);
        return two == "->" || two == "<-" || two == "--";
    }

    void skip_attributes() {
        int depth = 1;
        while (pos_ < text_.size() && depth > 0) {
            if (text_[pos_] == '[') ++depth;
            if (text_[pos_] == ']') --depth;
            ++pos_;
        }
    }

    std::string next() {
        skip_ws();
        if (pos_ >= text_.size()) return {};
        const char c = text_[pos_];
        if (c == '{' || c == '}' || c == ';' || c == '[' || c == ']' || c == ',') {
            ++pos_;
            return std::string(1, c);
        }
        auto two = text_.substr(pos_, 2);
        if (two == "->" || two == "<-" || two == "--") {
            pos_ += 2;
            return std::string(two);
        }
        if (c == '"') {
            std::string out;
            ++pos_;
            while (pos_ < text_.size() && text_[pos_] != '"') {
                if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
                out += text_[pos_++];
            }
            if (pos_ >= text_.size()) throw ValidationError("DOT: unterminated string");
            ++pos_;
            return out;
        }
        std::string out;
        while (pos_ < text_.size()) {
            const char d = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(d)) || d == '{' || d == '}' || d == ';' || d == '[' ||
                d == ']' || d == ',' || d == '"')
                break;
            auto op = text_.substr(pos_, 2);
            if (op == "->" || op == "<-" || op == "--") break;
            out += d;
            ++pos_;
        }
        return out;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

Edge edge_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_string())
        throw ValidationError("edge must be a [from, to] pair of names");
    return {j[0].get<std::string>(), j[1].get<std::string>()};
}

}  // namespace

nlohmann::json graph_to_json(const CausalGraph& g) {
    nlohmann::json j;
    j["nodes"] = g.nodes();
    j["directed"] = nlohmann::json::array();
    for (const auto& [a, b] : g.directed_edges()) j["directed"].push_back({a, b});
    j["undirected"] = nlohmann::json::array();
    for (const auto& [a, b] : g.undirected_edges()) j["undirected"].push_back({a, b});
    if (!g.bold_edges().empty()) {
        j["bold"] = nlohmann::json::array();
        for (const auto& [a, b] : g.bold_edges()) j["bold"].push_back({a, b});
    }
    return j;
}

CausalGraph graph_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array())
        throw ValidationError("graph JSON requires a 'nodes' array");
    CausalGraph g(j["nodes"].get<std::vector<std::string>>());
    if (j.contains("directed"))
        for (const auto& e : j["directed"]) {
            auto [a, b] = edge_from_json(e);
            g.add_directed(a, b);
        }
    if (j.contains("undirected"))
        for (const auto& e : j["undirected"]) {
            auto [a, b] = edge_from_json(e);
            g.add_undirected(a, b);
        }
    if (j.contains("bold")) {
        std::set<Edge> bold;
        for (const auto& e : j["bold"]) bold.insert(edge_from_json(e));
        g.set_bold_edges(std::move(bold));
    }
    return g;
}

std::optional<GraphFormat> parse_graph_format(std::string_view text) {
    if (text == "dot") return GraphFormat::Dot;
    if (text == "json") return GraphFormat::Json;
    return std::nullopt;
}

std::string export_graph(const CausalGraph& g, GraphFormat format) {
    if (format == GraphFormat::Dot) return to_dot(g);
    return graph_to_json(g).dump(2) + "\n";
}

CausalGraph parse_graph(std::string_view text, GraphFormat format) {
    if (format == GraphFormat::Dot) return DotReader(text).read();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("graph JSON: ") + e.what());
    }
    return graph_from_json(j);
}

}  // namespace whatif
