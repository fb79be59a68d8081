#include "fieldsym/report.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace fieldsym {

ReportNode ReportNode::boolean(bool v) {
    ReportNode n;
    n.kind_ = Kind::Bool;
    n.bool_ = v;
    return n;
}

ReportNode ReportNode::integer(std::int64_t v) {
    ReportNode n;
    n.kind_ = Kind::Int;
    n.int_ = v;
    return n;
}

ReportNode ReportNode::number(double v) {
    ReportNode n;
    n.kind_ = Kind::Double;
    n.double_ = v;
    return n;
}

ReportNode ReportNode::string(std::string v) {
    ReportNode n;
    n.kind_ = Kind::String;
    n.string_ = std::move(v);
    return n;
}

ReportNode ReportNode::array() {
    ReportNode n;
    n.kind_ = Kind::Array;
    return n;
}

ReportNode ReportNode::object() {
    ReportNode n;
    n.kind_ = Kind::Object;
    return n;
}

ReportNode& ReportNode::set(const std::string& key, ReportNode v) {
    fields_[key] = std::move(v);
    return *this;
}

ReportNode& ReportNode::push(ReportNode v) {
    items_.push_back(std::move(v));
    return *this;
}

const ReportNode* ReportNode::find(const std::string& key) const {
    auto it = fields_.find(key);
    return it == fields_.end() ? nullptr : &it->second;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // normalize the sign of zero
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void write_json_string(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

}  // namespace

void ReportNode::write_json(std::string& out) const {
    switch (kind_) {
        case Kind::Null:
            out += "null";
            break;
        case Kind::Bool:
            out += bool_ ? "true" : "false";
            break;
        case Kind::Int:
            out += std::to_string(int_);
            break;
        case Kind::Double: {
            std::string repr = format_double(double_);
            if (repr == "nan" || repr == "inf" || repr == "-inf") {
                write_json_string(repr, out);
            } else {
                out += repr;
            }
            break;
        }
        case Kind::String:
            write_json_string(string_, out);
            break;
        case Kind::Array: {
            out += '[';
            for (size_t i = 0; i < items_.size(); ++i) {
                if (i) out += ',';
                items_[i].write_json(out);
            }
            out += ']';
            break;
        }
        case Kind::Object: {
            out += '{';
            bool first = true;
            for (const auto& [key, value] : fields_) {
                if (!first) out += ',';
                first = false;
                write_json_string(key, out);
                out += ':';
                value.write_json(out);
            }
            out += '}';
            break;
        }
    }
}

void ReportNode::write_text(std::string& out, int indent) const {
    std::string pad(static_cast<size_t>(indent) * 2, ' ');
    switch (kind_) {
        case Kind::Null:
            out += "-";
            break;
        case Kind::Bool:
            out += bool_ ? "yes" : "no";
            break;
        case Kind::Int:
            out += std::to_string(int_);
            break;
        case Kind::Double:
            out += format_double(double_);
            break;
        case Kind::String:
            out += string_;
            break;
        case Kind::Array: {
            if (items_.empty()) {
                out += "[]";
                break;
            }
            bool scalars = true;
            for (const auto& item : items_)
                scalars &= item.kind() != Kind::Array && item.kind() != Kind::Object;
            if (scalars) {
                out += "[";
                for (size_t i = 0; i < items_.size(); ++i) {
                    if (i) out += ", ";
                    items_[i].write_text(out, 0);
                }
                out += "]";
            } else {
                for (const auto& item : items_) {
                    out += "\n" + pad + "- ";
                    std::string inner;
                    item.write_text(inner, indent + 1);
                    out += inner;
                }
            }
            break;
        }
        case Kind::Object: {
            for (const auto& [key, value] : fields_) {
                out += "\n" + pad + key + ": ";
                value.write_text(out, indent + 1);
            }
            break;
        }
    }
}

ReportNode& Report::add_section(const std::string& name) {
    sections.push_back({name, ReportNode::object()});
    return sections.back().body;
}

std::string emit_report(const Report& r, ReportFormat format) {
    if (format == ReportFormat::Json) {
        ReportNode root = ReportNode::object();
        root.set("schema", ReportNode::string(r.schema));
        root.set("tool_version", ReportNode::string(r.tool_version));
        root.set("model", ReportNode::string(r.model));
        root.set("command", ReportNode::string(r.command));
        ReportNode sections = ReportNode::object();
        for (const auto& s : r.sections) sections.set(s.name, s.body);
        root.set("sections", sections);
        root.set("status", ReportNode::string(r.passed ? "pass" : "fail"));
        std::string out;
        root.write_json(out);
        out += '\n';
        return out;
    }

    std::string out;
    out += "fieldsym report (" + r.schema + ", tool " + r.tool_version + ")\n";
    out += "model: " + r.model + "\n";
    out += "command: " + r.command + "\n";
    for (const auto& s : r.sections) {
        std::string header = s.name;
        for (auto& c : header) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        for (auto& c : header)
            if (c == '_') c = ' ';
        out += "\n== " + header + " ==";
        std::string body;
        s.body.write_text(body, 1);
        out += body + "\n";
    }
    out += "\nstatus: " + std::string(r.passed ? "pass" : "fail") + "\n";
    return out;
}

}  // namespace fieldsym
