#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace fieldsym {

/// Ordered value tree for machine-readable reports. Objects keep sorted
/// keys and doubles are rendered with a fixed 17-significant-digit format,
/// so emission is byte-deterministic for identical inputs.
class ReportNode {
  public:
    enum class Kind : std::uint8_t { Null, Bool, Int, Double, String, Array, Object };

    ReportNode() : kind_(Kind::Null) {}
    static ReportNode boolean(bool v);
    static ReportNode integer(std::int64_t v);
    static ReportNode number(double v);
    static ReportNode string(std::string v);
    static ReportNode array();
    static ReportNode object();

    Kind kind() const { return kind_; }
    ReportNode& set(const std::string& key, ReportNode v);  // object
    ReportNode& push(ReportNode v);                         // array

    const ReportNode* find(const std::string& key) const;
    const std::vector<ReportNode>& items() const { return items_; }
    const std::map<std::string, ReportNode>& fields() const { return fields_; }
    bool as_bool() const { return bool_; }
    std::int64_t as_int() const { return int_; }
    double as_double() const { return double_; }
    const std::string& as_string() const { return string_; }

    void write_json(std::string& out) const;
    void write_text(std::string& out, int indent) const;

  private:
    Kind kind_;
    bool bool_ = false;
    std::int64_t int_ = 0;
    double double_ = 0.0;
    std::string string_;
    std::vector<ReportNode> items_;
    std::map<std::string, ReportNode> fields_;
};

struct ReportSection {
    std::string name;  // rendered upper-case in the text format
    ReportNode body;
};

struct Report {
    std::string schema = "fieldsym-report/1";
    std::string tool_version;
    std::string model;
    std::string command;
    std::vector<ReportSection> sections;
    bool passed = false;

    ReportNode& add_section(const std::string& name);
};

enum class ReportFormat : std::uint8_t { Text, Json };

/// Deterministic serialization: identical reports produce identical bytes.
std::string emit_report(const Report& r, ReportFormat format);

/// Pinned float formatting used across all report output.
std::string format_double(double v);

}  // namespace fieldsym
