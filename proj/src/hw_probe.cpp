#include "aft/hw_probe.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "aft/textio.hpp"

namespace aft::probe {

namespace {

// Longest digit prefix plus its remainder, for "64 bits" / "1GiB" style values.
std::pair<int64_t, std::string_view> split_number(std::string_view text, int line_no) {
    text = trim(text);
    std::size_t digits = 0;
    while (digits < text.size() && text[digits] >= '0' && text[digits] <= '9')
        ++digits;
    if (digits == 0)
        throw ParseError("expected a number in '" + std::string(text) + "'", line_no);
    int64_t value = parse_int(text.substr(0, digits), "value");
    return {value, trim(text.substr(digits))};
}

int64_t parse_size(std::string_view text, int line_no) {
    auto [value, unit] = split_number(text, line_no);
    if (unit.empty() || unit == "bytes")
        return value;
    if (unit == "KiB") return value << 10;
    if (unit == "MiB") return value << 20;
    if (unit == "GiB") return value << 30;
    if (unit == "TiB") return value << 40;
    throw ParseError("unknown size unit '" + std::string(unit) + "'", line_no);
}

int64_t parse_width(std::string_view text, int line_no) {
    auto [value, unit] = split_number(text, line_no);
    if (unit.empty() || unit == "bits" || unit == "bit")
        return value;
    throw ParseError("unknown width unit '" + std::string(unit) + "'", line_no);
}

int64_t parse_clock(std::string_view text, int line_no) {
    // lshw appends the cycle time in parentheses; only the frequency matters.
    if (auto paren = text.find('('); paren != std::string_view::npos)
        text = text.substr(0, paren);
    auto [value, unit] = split_number(text, line_no);
    if (unit.empty() || unit == "Hz") return value;
    if (unit == "kHz") return value * 1000;
    if (unit == "MHz") return value * 1000 * 1000;
    if (unit == "GHz") return value * 1000 * 1000 * 1000;
    throw ParseError("unknown clock unit '" + std::string(unit) + "'", line_no);
}

std::string render_size(int64_t bytes) {
    if (bytes > 0 && bytes % (int64_t{1} << 40) == 0) return std::to_string(bytes >> 40) + "TiB";
    if (bytes > 0 && bytes % (int64_t{1} << 30) == 0) return std::to_string(bytes >> 30) + "GiB";
    if (bytes > 0 && bytes % (int64_t{1} << 20) == 0) return std::to_string(bytes >> 20) + "MiB";
    if (bytes > 0 && bytes % (int64_t{1} << 10) == 0) return std::to_string(bytes >> 10) + "KiB";
    return std::to_string(bytes) + " bytes";
}

std::string render_clock(int64_t hz) {
    if (hz > 0 && hz % 1000000000 == 0) return std::to_string(hz / 1000000000) + "GHz";
    if (hz > 0 && hz % 1000000 == 0) return std::to_string(hz / 1000000) + "MHz";
    if (hz > 0 && hz % 1000 == 0) return std::to_string(hz / 1000) + "kHz";
    return std::to_string(hz) + "Hz";
}

struct OpenBank {
    MemoryModuleDescriptor bank;
    int header_line = 0;
    bool has_size = false;
    bool has_width = false;
    bool has_clock = false;
};

void close_bank(std::optional<OpenBank>& open, std::vector<MemoryModuleDescriptor>& banks) {
    if (!open)
        return;
    if (!open->has_size)
        throw ParseError("bank block is missing its size", open->header_line);
    if (!open->has_width)
        throw ParseError("bank block is missing its width", open->header_line);
    if (!open->has_clock)
        throw ParseError("bank block is missing its clock", open->header_line);
    banks.push_back(std::move(open->bank));
    open.reset();
}

} // namespace

std::vector<MemoryModuleDescriptor> parse_inventory(const std::string& text) {
    std::vector<MemoryModuleDescriptor> banks;
    std::optional<OpenBank> open;
    int line_no = 0;
    for (const std::string& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty())
            continue;

        if (line.starts_with("*-")) {
            close_bank(open, banks);
            if (line.starts_with("*-bank")) {
                open = OpenBank{};
                open->header_line = line_no;
            }
            continue;
        }
        if (!open)
            continue; // lines of the enclosing *-memory (or other) section

        auto colon = line.find(':');
        if (colon == std::string_view::npos)
            throw ParseError("expected 'key: value' inside a bank block", line_no);
        std::string_view key = trim(line.substr(0, colon));
        std::string_view value = trim(line.substr(colon + 1));

        if (key == "description") open->bank.description = std::string(value);
        else if (key == "vendor") open->bank.vendor = std::string(value);
        else if (key == "serial") open->bank.serial = std::string(value);
        else if (key == "slot") open->bank.slot = std::string(value);
        else if (key == "size") { open->bank.size_bytes = parse_size(value, line_no); open->has_size = true; }
        else if (key == "width") { open->bank.width_bits = parse_width(value, line_no); open->has_width = true; }
        else if (key == "clock") { open->bank.clock_hz = parse_clock(value, line_no); open->has_clock = true; }
        // anything else (physical id, ...) is deliberately ignored

        if (open->has_size && open->bank.size_bytes <= 0)
            throw ParseError("bank size must be positive", line_no);
        if (open->has_width && open->bank.width_bits <= 0)
            throw ParseError("bank width must be positive", line_no);
        if (open->has_clock && open->bank.clock_hz <= 0)
            throw ParseError("bank clock must be positive", line_no);
    }
    close_bank(open, banks);
    return banks;
}

std::string serialize_inventory(const std::vector<MemoryModuleDescriptor>& banks) {
    std::string out = "  *-memory\n";
    int index = 0;
    for (const MemoryModuleDescriptor& bank : banks) {
        out += "   *-bank:" + std::to_string(index++) + "\n";
        if (!bank.description.empty()) out += "        description: " + bank.description + "\n";
        if (!bank.vendor.empty()) out += "        vendor: " + bank.vendor + "\n";
        if (!bank.serial.empty()) out += "        serial: " + bank.serial + "\n";
        if (!bank.slot.empty()) out += "        slot: " + bank.slot + "\n";
        out += "        size: " + render_size(bank.size_bytes) + "\n";
        out += "        width: " + std::to_string(bank.width_bits) + " bits\n";
        out += "        clock: " + render_clock(bank.clock_hz) + "\n";
    }
    return out;
}

std::string to_string(FailureClass cls) {
    switch (cls) {
    case FailureClass::f0: return "f0";
    case FailureClass::f1: return "f1";
    case FailureClass::f2: return "f2";
    case FailureClass::f3: return "f3";
    case FailureClass::f4: return "f4";
    }
    return "?";
}

FailureClass failure_class_from(std::string_view name) {
    if (name == "f0") return FailureClass::f0;
    if (name == "f1") return FailureClass::f1;
    if (name == "f2") return FailureClass::f2;
    if (name == "f3") return FailureClass::f3;
    if (name == "f4") return FailureClass::f4;
    throw ParseError("unknown failure class '" + std::string(name) + "' (expected f0..f4)");
}

const char* failure_class_text(FailureClass cls) {
    switch (cls) {
    case FailureClass::f0: return "stable memory, no failures expected";
    case FailureClass::f1: return "rare transient cell faults, CMOS-like";
    case FailureClass::f2: return "permanent stuck-at cell faults";
    case FailureClass::f3: return "SDRAM-style single-event upsets";
    case FailureClass::f4: return "SDRAM-style upsets including latch-up";
    }
    return "?";
}

int severity_rank(FailureClass cls) {
    return static_cast<int>(cls);
}

int KbRecord::specificity() const {
    if (!serial_pattern.empty())
        return 3;
    if (!vendor_pattern.empty())
        return 2;
    return 1;
}

bool KbRecord::matches(const MemoryModuleDescriptor& module) const {
    if (!serial_pattern.empty())
        return glob_match(serial_pattern, module.serial);
    if (!vendor_pattern.empty())
        return glob_match(vendor_pattern, module.vendor) &&
               glob_match(description_pattern, module.description);
    return glob_match(description_pattern, module.description);
}

bool glob_match(std::string_view pattern, std::string_view text) {
    std::size_t p = 0, t = 0;
    std::size_t star = std::string_view::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*')
        ++p;
    return p == pattern.size();
}

KnowledgeBase parse_kb(const std::string& text) {
    KnowledgeBase kb;
    int line_no = 0;
    for (const std::string& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        auto arrow = line.find("->");
        if (arrow == std::string_view::npos)
            throw ParseError("expected 'key=pattern -> f<k>'", line_no);
        std::string_view left = trim(line.substr(0, arrow));
        std::string_view right = trim(line.substr(arrow + 2));

        try {
            KbRecord record;
            record.behavior = failure_class_from(right);
            bool has_serial = false, has_vendor = false, has_description = false;
            for (const std::string& part : split(left, '&')) {
                std::string_view field = trim(part);
                auto eq = field.find('=');
                if (eq == std::string_view::npos)
                    throw ParseError("expected key=pattern before '->'");
                std::string_view key = trim(field.substr(0, eq));
                std::string pattern(trim(field.substr(eq + 1)));
                if (key == "serial") { record.serial_pattern = pattern; has_serial = true; }
                else if (key == "vendor") { record.vendor_pattern = pattern; has_vendor = true; }
                else if (key == "description") { record.description_pattern = pattern; has_description = true; }
                else throw ParseError("unknown knowledge-base key '" + std::string(key) + "'");
            }
            bool serial_only = has_serial && !has_vendor && !has_description;
            bool vendor_description = !has_serial && has_vendor && has_description;
            bool description_only = !has_serial && !has_vendor && has_description;
            if (!serial_only && !vendor_description && !description_only)
                throw ParseError("record must use serial, vendor&description, or description");
            kb.records.push_back(std::move(record));
        } catch (const Error& err) {
            throw ParseError(err.what(), line_no);
        }
    }
    return kb;
}

std::string serialize_kb(const KnowledgeBase& kb) {
    std::string out;
    for (const KbRecord& record : kb.records) {
        if (!record.serial_pattern.empty()) {
            out += "serial=" + record.serial_pattern;
        } else if (!record.vendor_pattern.empty()) {
            out += "vendor=" + record.vendor_pattern +
                   "&description=" + record.description_pattern;
        } else {
            out += "description=" + record.description_pattern;
        }
        out += " -> " + to_string(record.behavior) + "\n";
    }
    return out;
}

FailureClass assess(const KnowledgeBase& kb, const MemoryModuleDescriptor& module,
                    FailureClass fallback) {
    const KbRecord* best = nullptr;
    for (const KbRecord& record : kb.records)
        if (record.matches(module) && (!best || record.specificity() > best->specificity()))
            best = &record;
    return best ? best->behavior : fallback;
}

NoToleratingMethod::NoToleratingMethod(FailureClass behavior, const std::string& context)
    : Error("no access method tolerates behavior " + to_string(behavior) +
            (context.empty() ? "" : " (" + context + ")")),
      behavior_(behavior) {}

std::vector<AccessMethod> parse_methods(const std::string& text) {
    std::vector<AccessMethod> methods;
    std::set<std::string> ids;
    int line_no = 0;
    for (const std::string& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        std::vector<std::string> fields = split(line, ',');
        if (fields.size() < 3)
            throw ParseError("expected id,cost,class[,class...]", line_no);
        try {
            AccessMethod method;
            method.id = std::string(trim(fields[0]));
            if (method.id.empty())
                throw ParseError("method id must not be empty");
            method.cost = parse_double(fields[1], "cost");
            if (method.cost < 0)
                throw ParseError("method cost must be >= 0");
            for (std::size_t i = 2; i < fields.size(); ++i)
                method.tolerates.insert(failure_class_from(trim(fields[i])));
            if (!ids.insert(method.id).second)
                throw ParseError("duplicate method id '" + method.id + "'");

            // A method named after a failure class must honor its own design.
            if (method.id.size() == 2 && method.id[0] == 'M' && method.id[1] >= '0' &&
                method.id[1] <= '4') {
                auto designed = static_cast<FailureClass>(method.id[1] - '0');
                if (!method.tolerates.count(designed))
                    throw ParseError("method " + method.id + " must tolerate " +
                                     to_string(designed));
                if (designed == FailureClass::f0 && method.tolerates.size() != 1)
                    throw ParseError("method M0 tolerates exactly f0");
            }
            methods.push_back(std::move(method));
        } catch (const Error& err) {
            throw ParseError(err.what(), line_no);
        }
    }
    return methods;
}

std::string serialize_methods(const std::vector<AccessMethod>& methods) {
    std::string out;
    for (const AccessMethod& method : methods) {
        out += method.id + "," + format_double(method.cost);
        for (FailureClass cls : method.tolerates)
            out += "," + to_string(cls);
        out += '\n';
    }
    return out;
}

const AccessMethod& select_method(const std::vector<AccessMethod>& methods,
                                  FailureClass behavior) {
    if (methods.empty())
        throw ConfigError("method catalog is empty");
    const AccessMethod* best = nullptr;
    for (const AccessMethod& method : methods) {
        if (!method.tolerates.count(behavior))
            continue;
        if (!best || method.cost < best->cost ||
            (method.cost == best->cost && method.id < best->id))
            best = &method;
    }
    if (!best)
        throw NoToleratingMethod(behavior);
    return *best;
}

ProbeReport run_probe(const std::vector<MemoryModuleDescriptor>& banks,
                      const KnowledgeBase& kb, const std::vector<AccessMethod>& methods,
                      FailureClass fallback) {
    ProbeReport report;
    for (const MemoryModuleDescriptor& bank : banks) {
        FailureClass behavior = assess(kb, bank, fallback);
        try {
            const AccessMethod& method = select_method(methods, behavior);
            report.rows.push_back({bank.slot, behavior, method.id, method.cost});
        } catch (const NoToleratingMethod&) {
            report.unservable.emplace_back(bank.slot, behavior);
        }
    }
    return report;
}

std::string report_csv(const ProbeReport& report) {
    std::string out = "slot,assumed_behavior,selected_method,cost\n";
    for (const ProbeRow& row : report.rows) {
        out += csv_field(row.slot);
        out += ',';
        out += to_string(row.behavior);
        out += ',';
        out += csv_field(row.method);
        out += ',';
        out += format_double(row.cost);
        out += '\n';
    }
    return out;
}

} // namespace aft::probe
