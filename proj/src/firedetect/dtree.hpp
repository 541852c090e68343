#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace firedetect::dtree {

enum class FeatureKind { numeric, boolean };

// Column-major binary-labelled table.
struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<FeatureKind> kinds;
    std::vector<std::vector<double>> columns;
    std::vector<int> labels; // 0 or 1

    std::size_t rows() const noexcept { return labels.size(); }
    std::size_t features() const noexcept { return feature_names.size(); }
    void add_feature(std::string name, FeatureKind kind);
    void add_row(const std::vector<double> &values, int label);
    std::vector<double> row(std::size_t i) const;
    void validate() const;
};

// Reads a CSV with a header line; lines starting with '#' are skipped.
// Columns holding only true/false are boolean features.
Dataset read_csv(std::istream &in, const std::string &label_column = "label",
                 const std::vector<std::string> &exclude = {});
Dataset read_csv_file(const std::string &path, const std::string &label_column = "label",
                      const std::vector<std::string> &exclude = {});

double entropy(const std::vector<int> &labels);
double entropy(std::size_t positives, std::size_t total);

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0; // left: x <= threshold
    double gain_ratio = 0.0;
    double gain = 0.0;
};

// Best binary split of `rows` by gain ratio with children of at least
// min_leaf rows; nullopt when no split has positive gain. With
// threshold_penalty the gain of a numeric split is reduced by
// log2(candidate thresholds) / rows before ranking and the positivity test.
std::optional<Split> best_split(const Dataset &data, const std::vector<std::size_t> &rows,
                                const std::vector<std::size_t> &features, std::size_t min_leaf = 1,
                                bool threshold_penalty = false);

struct TrainConfig {
    std::size_t min_leaf = 5;
    int max_depth = 8;
    double purity_stop = 0.99;
    bool threshold_penalty = true; // MDL charge for choosing a numeric threshold

    void validate() const;
};

struct TreeNode {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    int left = -1;  // x <= threshold
    int right = -1; // x > threshold
    int predicted = 0;
    double purity = 1.0; // share of the predicted class
    std::size_t support = 0;
    std::size_t positives = 0;
    int depth = 0;
};

struct Tree {
    std::vector<std::string> feature_names;
    std::vector<FeatureKind> kinds;
    std::vector<TreeNode> nodes; // nodes[0] is the root

    int predict(const std::vector<double> &row) const;
    int depth() const;
    std::size_t leaves() const;
};

Tree train(const Dataset &data, const TrainConfig &cfg = {});

enum class Comparator { le, gt, is_true, is_false };

struct Condition {
    std::string feature;
    Comparator op = Comparator::le;
    double threshold = 0.0;
};

struct Rule {
    std::vector<Condition> conditions; // conjunction
    int predicted = 0;
    double purity = 0.0;
    std::size_t support = 0;

    bool matches(const std::vector<std::string> &names, const std::vector<double> &row) const;
    std::string to_string() const;
};

// One rule per leaf with purity >= min_purity, bounds per feature merged,
// sorted by decreasing support.
std::vector<Rule> extract_rules(const Tree &tree, double min_purity = 0.90);

std::string tree_to_json(const Tree &tree, int indent = 2);
Tree tree_from_json(const std::string &text);
std::string rules_to_json(const std::vector<Rule> &rules, double min_purity, int indent = 2);
std::vector<Rule> rules_from_json(const std::string &text);
// Indented text, one line per node, reading from the root down.
std::string tree_to_text(const Tree &tree);

} // namespace firedetect::dtree
