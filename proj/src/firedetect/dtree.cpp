#include "firedetect/dtree.hpp"

#include "firedetect/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace firedetect::dtree {

using nlohmann::json;

void Dataset::add_feature(std::string name, FeatureKind kind) {
    if (!labels.empty()) {
        throw ValidationError("features must be declared before rows are added");
    }
    feature_names.push_back(std::move(name));
    kinds.push_back(kind);
    columns.emplace_back();
}

void Dataset::add_row(const std::vector<double> &values, int label) {
    if (values.size() != features()) {
        throw ValidationError("row arity " + std::to_string(values.size()) + " differs from " +
                              std::to_string(features()) + " features");
    }
    if (label != 0 && label != 1) {
        throw ValidationError("labels must be 0 or 1");
    }
    for (std::size_t f = 0; f < values.size(); ++f) {
        columns[f].push_back(values[f]);
    }
    labels.push_back(label);
}

std::vector<double> Dataset::row(std::size_t i) const {
    std::vector<double> r(features());
    for (std::size_t f = 0; f < features(); ++f) {
        r[f] = columns[f][i];
    }
    return r;
}

void Dataset::validate() const {
    if (kinds.size() != feature_names.size() || columns.size() != feature_names.size()) {
        throw ValidationError("dataset feature metadata is inconsistent");
    }
    for (std::size_t f = 0; f < columns.size(); ++f) {
        if (columns[f].size() != labels.size()) {
            throw ValidationError("column '" + feature_names[f] + "' has a different length");
        }
        for (double v : columns[f]) {
            if (!std::isfinite(v)) {
                throw ValidationError("column '" + feature_names[f] + "' holds a non-finite value");
            }
        }
    }
    for (int l : labels) {
        if (l != 0 && l != 1) {
            throw ValidationError("labels must be 0 or 1");
        }
    }
}

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::optional<bool> parse_bool(const std::string &s) {
    if (s == "true" || s == "True" || s == "TRUE") {
        return true;
    }
    if (s == "false" || s == "False" || s == "FALSE") {
        return false;
    }
    return std::nullopt;
}

std::optional<double> parse_double(const std::string &s) {
    double v = 0.0;
    const char *b = s.data();
    const char *e = s.data() + s.size();
    if (b != e && *b == '+') {
        ++b;
    }
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e || s.empty()) {
        return std::nullopt;
    }
    return v;
}

} // namespace

Dataset read_csv(std::istream &in, const std::string &label_column, const std::vector<std::string> &exclude) {
    std::string line;
    std::vector<std::string> header;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') {
            continue;
        }
        header = split_csv(line);
        break;
    }
    if (header.empty()) {
        throw ValidationError("dataset is empty: no header line");
    }
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) {
        throw ValidationError("dataset has no label column '" + label_column + "'");
    }
    const std::size_t label_idx = static_cast<std::size_t>(label_it - header.begin());
    std::vector<std::size_t> feature_idx;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != label_idx && std::find(exclude.begin(), exclude.end(), header[c]) == exclude.end()) {
            feature_idx.push_back(c);
        }
    }

    std::vector<std::vector<std::string>> raw;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || line[0] == '#') {
            continue;
        }
        auto cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(cells.size()));
        }
        raw.push_back(std::move(cells));
    }

    Dataset ds;
    for (std::size_t c : feature_idx) {
        bool all_bool = !raw.empty();
        for (const auto &r : raw) {
            all_bool = all_bool && parse_bool(r[c]).has_value();
        }
        ds.add_feature(header[c], all_bool ? FeatureKind::boolean : FeatureKind::numeric);
    }
    std::vector<double> values(feature_idx.size());
    for (std::size_t r = 0; r < raw.size(); ++r) {
        for (std::size_t k = 0; k < feature_idx.size(); ++k) {
            const std::string &cell = raw[r][feature_idx[k]];
            if (ds.kinds[k] == FeatureKind::boolean) {
                values[k] = *parse_bool(cell) ? 1.0 : 0.0;
                continue;
            }
            const auto v = parse_double(cell);
            if (!v || !std::isfinite(*v)) {
                throw ValidationError("row " + std::to_string(r + 1) + ", column '" + header[feature_idx[k]] +
                                      "': not a number: '" + cell + "'");
            }
            values[k] = *v;
        }
        const std::string &lab = raw[r][label_idx];
        int label = 0;
        if (auto b = parse_bool(lab)) {
            label = *b ? 1 : 0;
        } else if (lab == "1" || lab == "0") {
            label = lab == "1" ? 1 : 0;
        } else {
            throw ValidationError("row " + std::to_string(r + 1) + ": label must be true/false or 1/0, got '" +
                                  lab + "'");
        }
        ds.add_row(values, label);
    }
    return ds;
}

Dataset read_csv_file(const std::string &path, const std::string &label_column,
                      const std::vector<std::string> &exclude) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open dataset '" + path + "'");
    }
    return read_csv(in, label_column, exclude);
}

double entropy(std::size_t positives, std::size_t total) {
    if (total == 0) {
        throw DomainError("entropy of an empty label set");
    }
    if (positives == 0 || positives == total) {
        return 0.0;
    }
    const double p = static_cast<double>(positives) / static_cast<double>(total);
    const double q = 1.0 - p;
    return -(p * std::log2(p) + q * std::log2(q));
}

double entropy(const std::vector<int> &labels) {
    std::size_t pos = 0;
    for (int l : labels) {
        pos += l == 1 ? 1 : 0;
    }
    return entropy(pos, labels.size());
}

namespace {

// Strict improvement order: gain ratio, gain, feature name, lower threshold.
bool better(const Split &a, const Split &b, const Dataset &data) {
    if (a.gain_ratio != b.gain_ratio) {
        return a.gain_ratio > b.gain_ratio;
    }
    if (a.gain != b.gain) {
        return a.gain > b.gain;
    }
    if (a.feature != b.feature) {
        return data.feature_names[a.feature] < data.feature_names[b.feature];
    }
    return a.threshold < b.threshold;
}

} // namespace

std::optional<Split> best_split(const Dataset &data, const std::vector<std::size_t> &rows,
                                const std::vector<std::size_t> &features, std::size_t min_leaf,
                                bool threshold_penalty) {
    const std::size_t n = rows.size();
    if (min_leaf == 0) {
        min_leaf = 1;
    }
    if (n < 2 * min_leaf) {
        return std::nullopt;
    }
    std::size_t pos = 0;
    for (std::size_t r : rows) {
        pos += static_cast<std::size_t>(data.labels[r]);
    }
    const double parent = entropy(pos, n);
    if (parent == 0.0) {
        return std::nullopt;
    }
    const double dn = static_cast<double>(n);

    std::optional<Split> best;
    std::vector<std::pair<double, int>> sorted(n);
    for (std::size_t f : features) {
        const auto &col = data.columns[f];
        for (std::size_t i = 0; i < n; ++i) {
            sorted[i] = {col[rows[i]], data.labels[rows[i]]};
        }
        std::sort(sorted.begin(), sorted.end());
        if (sorted.front().first == sorted.back().first) {
            continue; // constant here
        }
        double penalty = 0.0;
        if (threshold_penalty) {
            std::size_t candidates = 0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                candidates += sorted[i].first != sorted[i + 1].first ? 1 : 0;
            }
            penalty = std::log2(static_cast<double>(candidates)) / dn;
        }
        std::size_t left_pos = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            left_pos += static_cast<std::size_t>(sorted[i].second);
            if (sorted[i].first == sorted[i + 1].first) {
                continue;
            }
            const std::size_t nl = i + 1;
            const std::size_t nr = n - nl;
            if (nl < min_leaf || nr < min_leaf) {
                continue;
            }
            const double wl = static_cast<double>(nl) / dn;
            const double wr = static_cast<double>(nr) / dn;
            const double el = entropy(left_pos, nl);
            const double er = entropy(pos - left_pos, nr);
            const double raw = parent - wl * el - wr * er;
            if (threshold_penalty) {
                // Fayyad-Irani acceptance: the gain must pay for encoding the cut
                // and the class distributions of both children
                const auto classes = [](std::size_t p, std::size_t t) { return (p > 0) + (p < t); };
                const int k = classes(pos, n), k1 = classes(left_pos, nl), k2 = classes(pos - left_pos, nr);
                const double delta = std::log2(std::pow(3.0, k) - 2.0) - (k * parent - k1 * el - k2 * er);
                if (!(raw > (std::log2(dn - 1.0) + delta) / dn)) {
                    continue;
                }
            }
            const double gain = raw - penalty;
            if (!(gain > 1e-12)) {
                continue;
            }
            const double split_info = -(wl * std::log2(wl) + wr * std::log2(wr));
            Split s;
            s.feature = f;
            s.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
            s.gain = gain;
            s.gain_ratio = gain / split_info;
            if (!best || better(s, *best, data)) {
                best = s;
            }
        }
    }
    return best;
}

void TrainConfig::validate() const {
    if (min_leaf < 1) {
        throw ValidationError("min_leaf must be >= 1");
    }
    if (max_depth < 0) {
        throw ValidationError("max_depth must be >= 0");
    }
    if (!(purity_stop > 0.5 && purity_stop <= 1.0)) {
        throw ValidationError("purity_stop must lie in (0.5, 1]");
    }
}

namespace {

void grow(const Dataset &data, const TrainConfig &cfg, const std::vector<std::size_t> &features, Tree &tree,
          int node_id, std::vector<std::size_t> rows, int depth) {
    std::size_t pos = 0;
    for (std::size_t r : rows) {
        pos += static_cast<std::size_t>(data.labels[r]);
    }
    {
        TreeNode &node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.support = rows.size();
        node.positives = pos;
        node.depth = depth;
        node.predicted = 2 * pos > rows.size() ? 1 : 0;
        const double p = rows.empty() ? 0.0 : static_cast<double>(pos) / static_cast<double>(rows.size());
        node.purity = node.predicted == 1 ? p : 1.0 - p;
        node.leaf = true;
        if (node.purity >= cfg.purity_stop || depth >= cfg.max_depth) {
            return;
        }
    }
    const auto split = best_split(data, rows, features, cfg.min_leaf, cfg.threshold_penalty);
    if (!split) {
        return;
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    const auto &col = data.columns[split->feature];
    for (std::size_t r : rows) {
        (col[r] <= split->threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int r = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    {
        TreeNode &node = tree.nodes[static_cast<std::size_t>(node_id)];
        node.leaf = false;
        node.feature = split->feature;
        node.threshold = split->threshold;
        node.left = l;
        node.right = r;
    }
    grow(data, cfg, features, tree, l, std::move(left), depth + 1);
    grow(data, cfg, features, tree, r, std::move(right), depth + 1);
}

} // namespace

Tree train(const Dataset &data, const TrainConfig &cfg) {
    data.validate();
    cfg.validate();
    if (data.rows() == 0) {
        throw ValidationError("cannot train on an empty dataset");
    }
    Tree tree;
    tree.feature_names = data.feature_names;
    tree.kinds = data.kinds;
    tree.nodes.emplace_back();
    std::vector<std::size_t> rows(data.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = i;
    }
    std::vector<std::size_t> features(data.features());
    for (std::size_t f = 0; f < features.size(); ++f) {
        features[f] = f;
    }
    grow(data, cfg, features, tree, 0, std::move(rows), 0);
    return tree;
}

int Tree::predict(const std::vector<double> &row) const {
    if (nodes.empty()) {
        throw ValidationError("empty tree");
    }
    std::size_t id = 0;
    while (!nodes[id].leaf) {
        const TreeNode &n = nodes[id];
        id = static_cast<std::size_t>(row.at(n.feature) <= n.threshold ? n.left : n.right);
    }
    return nodes[id].predicted;
}

int Tree::depth() const {
    int d = 0;
    for (const auto &n : nodes) {
        d = std::max(d, n.depth);
    }
    return d;
}

std::size_t Tree::leaves() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode &n) { return n.leaf; }));
}

namespace {

struct Bounds {
    std::optional<double> le; // x <= le
    std::optional<double> gt; // x > gt
};

void collect(const Tree &tree, int id, std::vector<std::pair<std::size_t, Bounds>> &path, double min_purity,
             std::vector<Rule> &out) {
    const TreeNode &n = tree.nodes[static_cast<std::size_t>(id)];
    if (n.leaf) {
        if (n.purity + 1e-12 < min_purity) {
            return;
        }
        Rule rule;
        rule.predicted = n.predicted;
        rule.purity = n.purity;
        rule.support = n.support;
        for (const auto &[f, b] : path) {
            const std::string &name = tree.feature_names[f];
            if (tree.kinds[f] == FeatureKind::boolean) {
                rule.conditions.push_back({name, b.le ? Comparator::is_false : Comparator::is_true, 0.5});
                continue;
            }
            if (b.gt) {
                rule.conditions.push_back({name, Comparator::gt, *b.gt});
            }
            if (b.le) {
                rule.conditions.push_back({name, Comparator::le, *b.le});
            }
        }
        out.push_back(std::move(rule));
        return;
    }
    for (int side = 0; side < 2; ++side) {
        auto it = std::find_if(path.begin(), path.end(), [&](const auto &p) { return p.first == n.feature; });
        const bool added = it == path.end();
        if (added) {
            path.emplace_back(n.feature, Bounds{});
            it = path.end() - 1;
        }
        const Bounds saved = it->second;
        if (side == 0) {
            it->second.le = it->second.le ? std::min(*it->second.le, n.threshold) : n.threshold;
        } else {
            it->second.gt = it->second.gt ? std::max(*it->second.gt, n.threshold) : n.threshold;
        }
        collect(tree, side == 0 ? n.left : n.right, path, min_purity, out);
        // path may have grown and reallocated below us; find the entry again
        auto again = std::find_if(path.begin(), path.end(), [&](const auto &p) { return p.first == n.feature; });
        if (added) {
            path.erase(again);
        } else {
            again->second = saved;
        }
    }
}

std::string comparator_name(Comparator c) {
    switch (c) {
    case Comparator::le:
        return "<=";
    case Comparator::gt:
        return ">";
    case Comparator::is_true:
        return "is_true";
    case Comparator::is_false:
        return "is_false";
    }
    return "<=";
}

Comparator comparator_from(const std::string &s) {
    if (s == "<=") {
        return Comparator::le;
    }
    if (s == ">") {
        return Comparator::gt;
    }
    if (s == "is_true") {
        return Comparator::is_true;
    }
    if (s == "is_false") {
        return Comparator::is_false;
    }
    throw ValidationError("unknown comparator '" + s + "'");
}

std::string fmt_threshold(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace

std::vector<Rule> extract_rules(const Tree &tree, double min_purity) {
    std::vector<Rule> out;
    if (tree.nodes.empty()) {
        return out;
    }
    std::vector<std::pair<std::size_t, Bounds>> path;
    collect(tree, 0, path, min_purity, out);
    std::stable_sort(out.begin(), out.end(), [](const Rule &a, const Rule &b) { return a.support > b.support; });
    return out;
}

bool Rule::matches(const std::vector<std::string> &names, const std::vector<double> &row) const {
    for (const auto &c : conditions) {
        const auto it = std::find(names.begin(), names.end(), c.feature);
        if (it == names.end()) {
            throw ValidationError("rule refers to unknown feature '" + c.feature + "'");
        }
        const double v = row.at(static_cast<std::size_t>(it - names.begin()));
        bool ok = true;
        switch (c.op) {
        case Comparator::le:
            ok = v <= c.threshold;
            break;
        case Comparator::gt:
            ok = v > c.threshold;
            break;
        case Comparator::is_true:
            ok = v > 0.5;
            break;
        case Comparator::is_false:
            ok = v <= 0.5;
            break;
        }
        if (!ok) {
            return false;
        }
    }
    return true;
}

std::string Rule::to_string() const {
    std::ostringstream os;
    if (conditions.empty()) {
        os << "always";
    }
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        const Condition &c = conditions[i];
        if (i > 0) {
            os << " AND ";
        }
        switch (c.op) {
        case Comparator::is_true:
            os << c.feature << " is True";
            break;
        case Comparator::is_false:
            os << c.feature << " is False";
            break;
        default:
            os << c.feature << ' ' << comparator_name(c.op) << ' ' << fmt_threshold(c.threshold);
        }
    }
    os << " => " << (predicted == 1 ? "True" : "False") << " (purity " << fmt_threshold(purity) << ", support "
       << support << ")";
    return os.str();
}

std::string tree_to_json(const Tree &tree, int indent) {
    json j;
    j["schema"] = "firedetect.tree v1";
    json feats = json::array();
    for (std::size_t f = 0; f < tree.feature_names.size(); ++f) {
        feats.push_back({{"name", tree.feature_names[f]},
                         {"kind", tree.kinds[f] == FeatureKind::boolean ? "boolean" : "numeric"}});
    }
    j["features"] = feats;
    json nodes = json::array();
    for (const auto &n : tree.nodes) {
        json jn{{"leaf", n.leaf},         {"predicted", n.predicted}, {"purity", n.purity},
                {"support", n.support},   {"positives", n.positives}, {"depth", n.depth}};
        if (!n.leaf) {
            jn["feature"] = tree.feature_names[n.feature];
            jn["threshold"] = n.threshold;
            jn["left"] = n.left;
            jn["right"] = n.right;
        }
        nodes.push_back(jn);
    }
    j["nodes"] = nodes;
    return j.dump(indent);
}

Tree tree_from_json(const std::string &text) {
    try {
        const json j = json::parse(text);
        if (j.at("schema").get<std::string>() != "firedetect.tree v1") {
            throw ValidationError("unsupported tree schema");
        }
        Tree t;
        for (const auto &f : j.at("features")) {
            t.feature_names.push_back(f.at("name").get<std::string>());
            t.kinds.push_back(f.at("kind").get<std::string>() == "boolean" ? FeatureKind::boolean
                                                                           : FeatureKind::numeric);
        }
        for (const auto &jn : j.at("nodes")) {
            TreeNode n;
            n.leaf = jn.at("leaf").get<bool>();
            n.predicted = jn.at("predicted").get<int>();
            n.purity = jn.at("purity").get<double>();
            n.support = jn.at("support").get<std::size_t>();
            n.positives = jn.at("positives").get<std::size_t>();
            n.depth = jn.at("depth").get<int>();
            if (!n.leaf) {
                const auto name = jn.at("feature").get<std::string>();
                const auto it = std::find(t.feature_names.begin(), t.feature_names.end(), name);
                if (it == t.feature_names.end()) {
                    throw ValidationError("tree node refers to unknown feature '" + name + "'");
                }
                n.feature = static_cast<std::size_t>(it - t.feature_names.begin());
                n.threshold = jn.at("threshold").get<double>();
                n.left = jn.at("left").get<int>();
                n.right = jn.at("right").get<int>();
            }
            t.nodes.push_back(n);
        }
        return t;
    } catch (const json::exception &e) {
        throw ValidationError(std::string("malformed tree JSON: ") + e.what());
    }
}

std::string rules_to_json(const std::vector<Rule> &rules, double min_purity, int indent) {
    json j;
    j["schema"] = "firedetect.rules v1";
    j["min_purity"] = min_purity;
    json arr = json::array();
    for (const auto &r : rules) {
        json conds = json::array();
        for (const auto &c : r.conditions) {
            json jc{{"feature", c.feature}, {"op", comparator_name(c.op)}};
            if (c.op == Comparator::le || c.op == Comparator::gt) {
                jc["threshold"] = c.threshold;
            }
            conds.push_back(jc);
        }
        arr.push_back({{"conditions", conds},
                       {"predicted", r.predicted == 1},
                       {"purity", r.purity},
                       {"support", r.support},
                       {"text", r.to_string()}});
    }
    j["rules"] = arr;
    return j.dump(indent);
}

std::vector<Rule> rules_from_json(const std::string &text) {
    try {
        const json j = json::parse(text);
        if (j.at("schema").get<std::string>() != "firedetect.rules v1") {
            throw ValidationError("unsupported rules schema");
        }
        std::vector<Rule> out;
        for (const auto &jr : j.at("rules")) {
            Rule r;
            r.predicted = jr.at("predicted").get<bool>() ? 1 : 0;
            r.purity = jr.at("purity").get<double>();
            r.support = jr.at("support").get<std::size_t>();
            for (const auto &jc : jr.at("conditions")) {
                Condition c;
                c.feature = jc.at("feature").get<std::string>();
                c.op = comparator_from(jc.at("op").get<std::string>());
                c.threshold = jc.contains("threshold") ? jc.at("threshold").get<double>() : 0.5;
                r.conditions.push_back(c);
            }
            out.push_back(std::move(r));
        }
        return out;
    } catch (const json::exception &e) {
        throw ValidationError(std::string("malformed rules JSON: ") + e.what());
    }
}

namespace {

void text_node(const Tree &tree, int id, const std::string &prefix, std::ostringstream &os) {
    const TreeNode &n = tree.nodes[static_cast<std::size_t>(id)];
    if (n.leaf) {
        os << prefix << "leaf: " << (n.predicted == 1 ? "True" : "False") << " (purity " << fmt_threshold(n.purity)
           << ", n=" << n.support << ")\n";
        return;
    }
    const std::string &name = tree.feature_names[n.feature];
    const bool boolean = tree.kinds[n.feature] == FeatureKind::boolean;
    os << prefix << (boolean ? name + " is False" : name + " <= " + fmt_threshold(n.threshold)) << " (n=" << n.support
       << ")\n";
    text_node(tree, n.left, prefix + "|   ", os);
    os << prefix << (boolean ? name + " is True" : name + " > " + fmt_threshold(n.threshold)) << '\n';
    text_node(tree, n.right, prefix + "|   ", os);
}

} // namespace

std::string tree_to_text(const Tree &tree) {
    std::ostringstream os;
    if (!tree.nodes.empty()) {
        text_node(tree, 0, "", os);
    }
    return os.str();
}

} // namespace firedetect::dtree
