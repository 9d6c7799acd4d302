#include <sstream>

#include "metriscope/metrics.hpp"

namespace metriscope {

std::string_view to_string(ReduceKind r) {
    switch (r) {
    case ReduceKind::Sum: return "sum";
    case ReduceKind::Max: return "max";
    default: return "avg";
    }
}

std::string MapKind::describe() const {
    switch (op) {
    case Op::ConstantOne: return "1";
    case Op::MagicNumberIndicator: return "1 if numeric value not in {-1, 0, 1}";
    case Op::CaptureTextInSet: {
        std::string s = "1 if @" + capture + " in {";
        for (std::size_t i = 0; i < text_set.size(); ++i) {
            if (i) s += ", ";
            s += text_set[i];
        }
        return s + "}";
    }
    case Op::CaptureTextContains:
        return "1 if @" + capture + " contains '" + needle + "' (case-insensitive)";
    case Op::ConditionAuxPlusOne: return "1 + " + aux_ids.front() + " over the condition";
    case Op::AuxPositiveIndicator: return "1 if " + aux_ids.front() + " > 0 in the subtree";
    case Op::AuxRootSum: {
        std::string s;
        for (std::size_t i = 0; i < aux_ids.size(); ++i) {
            if (i) s += " + ";
            s += aux_ids[i];
        }
        return s + " at the node";
    }
    case Op::SubtreeHeight: return "named-node height of the subtree";
    case Op::CaptureCardinality: return "number of nodes bound by @" + capture;
    case Op::OperandCount: {
        std::string s = "nodes of categories {";
        for (std::size_t i = 0; i < categories.size(); ++i) {
            if (i) s += ", ";
            s += categories[i];
        }
        return s + "} in the subtree";
    }
    case Op::CategoryNestingDepth: return "1 + proper " + categories.front() + " ancestors";
    case Op::CategoryNestedIndicator:
        return "1 if a proper " + categories.front() + " ancestor exists";
    case Op::CategoryDescendantCount:
        return categories.front() + " nodes in the proper subtree";
    }
    return "";
}

MetricCatalog::MetricCatalog(std::vector<MetricSpec> specs) : specs_(std::move(specs)) {
    for (const auto& spec : specs_) {
        if (spec.exported) exported_.push_back(&spec);
    }
}

const MetricSpec& MetricCatalog::find(std::string_view id) const {
    for (const auto& spec : specs_) {
        if (spec.id == id) return spec;
    }
    throw Error("unknown metric id '" + std::string(id) + "'");
}

const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = {
        "S1", "S2", "S3", "S4", "S5", "C1", "C2", "C3", "C4", "C5", "C6", "C7",
        "C8", "C9", "C10", "C11", "C12", "M1", "M2", "M3", "T1", "T2", "T3",
    };
    return names;
}

namespace {

MetricSpec spec(std::string id, std::string description, std::string filter, MapKind map,
                ReduceKind reduce, bool exported = true) {
    MetricSpec s;
    s.id = std::move(id);
    s.description = std::move(description);
    s.filter_text = std::move(filter);
    s.filter = parse_query(s.filter_text);
    s.map = std::move(map);
    s.reduce = reduce;
    s.exported = exported;
    return s;
}

MapKind one() { return MapKind{}; }

MapKind map_of(MapKind::Op op) {
    MapKind m;
    m.op = op;
    return m;
}

MetricCatalog build() {
    std::vector<MetricSpec> specs;

    specs.push_back(spec("S1", "# magic numbers", "(number_literal) @num",
                         map_of(MapKind::Op::MagicNumberIndicator), ReduceKind::Sum));
    specs.push_back(spec("S2", "# goto statements", "(goto_stmt)", one(), ReduceKind::Sum));
    specs.push_back(spec("S3", "# function pointers",
                         "((declaration (init_declarator (function_declarator))) | "
                         "(parameter_declaration (function_declarator)))",
                         one(), ReduceKind::Sum));
    specs.push_back(spec("S4", "# function calls with unused returns", "(expr_stmt (call_expr))",
                         one(), ReduceKind::Sum));
    specs.push_back(spec("S5", "# if statements without else", "(if_stmt !alternative)", one(),
                         ReduceKind::Sum));

    {
        MapKind m = map_of(MapKind::Op::ConditionAuxPlusOne);
        m.aux_ids = {"C1.1"};
        specs.push_back(
            spec("C1", "cyclomatic complexity (decision points)", "(cond_stmt (_))", m,
                 ReduceKind::Sum));
    }
    specs.push_back(spec("C2", "# loops", "(loop_stmt)", one(), ReduceKind::Sum));
    specs.push_back(spec("C3", "# nested loops", "(loop_stmt ((!loop_stmt)^* (loop_stmt)))", one(),
                         ReduceKind::Sum));
    {
        MapKind m = map_of(MapKind::Op::CategoryNestingDepth);
        m.categories = {"loop_stmt"};
        specs.push_back(spec("C4", "max nesting level of loops", "(loop_stmt)", m,
                             ReduceKind::Max));
    }
    specs.push_back(
        spec("C5", "# parameters", "(parameter_declaration)", one(), ReduceKind::Sum));
    {
        MapKind m = map_of(MapKind::Op::CategoryNestedIndicator);
        m.categories = {"ctrl_stmt"};
        specs.push_back(spec("C6", "# nested control structures", "(ctrl_stmt)", m,
                             ReduceKind::Sum));
    }
    {
        MapKind m = map_of(MapKind::Op::CategoryNestingDepth);
        m.categories = {"ctrl_stmt"};
        specs.push_back(spec("C7", "max nesting level of control structures", "(ctrl_stmt)", m,
                             ReduceKind::Max));
    }
    {
        MapKind m = map_of(MapKind::Op::CategoryDescendantCount);
        m.categories = {"ctrl_stmt"};
        specs.push_back(spec("C8", "max # control structures in a control structure",
                             "(ctrl_stmt)", m, ReduceKind::Max));
    }
    specs.push_back(spec("C9", "# return statements", "(return_stmt)", one(), ReduceKind::Sum));
    specs.push_back(spec("C10", "# type casts", "(cast_expr)", one(), ReduceKind::Sum));
    specs.push_back(spec("C11", "# local variables", "(declaration)", one(), ReduceKind::Sum));
    {
        MapKind m = map_of(MapKind::Op::OperandCount);
        m.categories = {"identifier", "literal"};
        specs.push_back(spec("C12", "max # operands in an expression", "(binary_expr)", m,
                             ReduceKind::Max));
    }

    {
        MapKind m = map_of(MapKind::Op::AuxRootSum);
        m.aux_ids = {"M1.1", "M1.2"};
        specs.push_back(spec("M1", "# heap allocations", "(_)", m, ReduceKind::Sum));
    }
    specs.push_back(spec("M2", "# pointer dereferences",
                         "((pointer_expr) | (subscript_expr) | (field_expr))", one(),
                         ReduceKind::Sum));
    {
        MapKind m = map_of(MapKind::Op::AuxPositiveIndicator);
        m.aux_ids = {"M3.1"};
        specs.push_back(spec("M3", "# pointer arithmetic expressions",
                             "((binary_expr) | (unary_expr))", m, ReduceKind::Sum));
    }

    specs.push_back(spec("T1", "# syntax tree nodes", "(_)", one(), ReduceKind::Sum));
    {
        MapKind m = map_of(MapKind::Op::SubtreeHeight);
        specs.push_back(spec("T2", "max height of syntax tree", "(_)", m, ReduceKind::Max));
    }
    {
        MapKind m = map_of(MapKind::Op::CaptureCardinality);
        m.capture = "children";
        specs.push_back(spec("T3", "average # of children per node", "(_ (_)+ @children)", m,
                             ReduceKind::Avg));
    }

    // Auxiliary measures, referenced from maps, never exported as features.
    {
        MapKind m = map_of(MapKind::Op::CaptureTextInSet);
        m.capture = "op";
        m.text_set = {"&&", "||"};
        specs.push_back(spec("C1.1", "# logical operators", "(binary_expr (operator) @op)", m,
                             ReduceKind::Sum, /*exported=*/false));
    }
    specs.push_back(
        spec("M1.1", "# new allocations", "(new_expr)", one(), ReduceKind::Sum, false));
    {
        MapKind m = map_of(MapKind::Op::CaptureTextContains);
        m.capture = "name";
        m.needle = "alloc";
        specs.push_back(spec("M1.2", "# allocation calls",
                             "(call_expr function: (identifier) @name)", m, ReduceKind::Sum,
                             false));
    }
    specs.push_back(spec("M3.1", "# pointer-typed nodes", "({type: 'pointer'})", one(),
                         ReduceKind::Sum, false));

    return MetricCatalog(std::move(specs));
}

} // namespace

const MetricCatalog& default_catalog() {
    static const MetricCatalog catalog = build();
    return catalog;
}

std::string catalog_manifest(const MetricCatalog& catalog) {
    std::ostringstream os;
    os << "[\n";
    bool first = true;
    for (const auto& m : catalog.all()) {
        if (!first) os << ",\n";
        first = false;
        os << "  {\"id\": \"" << m.id << "\", \"description\": \"" << m.description
           << "\", \"filter\": \"";
        for (char c : m.filter_text) {
            if (c == '"' || c == '\\') os << '\\';
            os << c;
        }
        os << "\", \"map\": \"" << m.map.describe() << "\", \"reduce\": \""
           << to_string(m.reduce) << "\", \"exported\": " << (m.exported ? "true" : "false")
           << "}";
    }
    os << "\n]\n";
    return os.str();
}

std::uint64_t catalog_hash(const MetricCatalog& catalog) {
    // FNV-1a over the manifest text.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : catalog_manifest(catalog)) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace metriscope
