#include "json_locator.hpp"

#include <algorithm>
#include <iterator>

namespace valence {

std::string format_diagnostic(const Diagnostic& d, const std::string& file) {
    std::string out;
    if (!file.empty()) out += file + ":";
    out += std::to_string(d.location.line) + ":" + std::to_string(d.location.column) + ": ";
    out += d.severity == Severity::error ? "error" : "warning";
    out += "[" + d.code + "]: " + d.message;
    if (!d.location.path.empty()) out += " (at " + d.location.path + ")";
    return out;
}

}  // namespace valence

namespace valence::detail {

namespace {

// Forward iterator over the text that publishes its position on every
// increment, so SAX callbacks can ask how far the lexer got.
class TrackingIterator {
public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    TrackingIterator() = default;
    TrackingIterator(const char* p, std::size_t* cursor, const char* base) : p_(p), cursor_(cursor), base_(base) {}

    reference operator*() const { return *p_; }
    TrackingIterator& operator++() {
        ++p_;
        if (cursor_) *cursor_ = static_cast<std::size_t>(p_ - base_);
        return *this;
    }
    TrackingIterator operator++(int) {
        auto copy = *this;
        ++*this;
        return copy;
    }
    friend bool operator==(const TrackingIterator& a, const TrackingIterator& b) { return a.p_ == b.p_; }

private:
    const char* p_ = nullptr;
    std::size_t* cursor_ = nullptr;
    const char* base_ = nullptr;
};

class Locator : public nlohmann::json_sax<nlohmann::json> {
public:
    Locator(std::string_view text, const std::size_t* cursor, SourceMap* map)
        : text_(text), cursor_(cursor), map_(map) {}

    bool null() override { return scalar(literal_start(4)); }
    bool boolean(bool v) override { return scalar(literal_start(v ? 4 : 5)); }
    bool number_integer(number_integer_t) override { return scalar(number_start()); }
    bool number_unsigned(number_unsigned_t) override { return scalar(number_start()); }
    bool number_float(number_float_t, const string_t&) override { return scalar(number_start()); }
    bool string(string_t&) override { return scalar(string_start()); }
    bool binary(binary_t&) override { return scalar(*cursor_); }

    bool start_object(std::size_t) override { return open(true); }
    bool start_array(std::size_t) override { return open(false); }
    bool end_object() override { return close(); }
    bool end_array() override { return close(); }

    bool key(string_t& k) override {
        stack_.back().key = k;
        map_->record_value(pointer_append(stack_.back().pointer, k) + "#key", string_start());
        return true;
    }

    bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& ex) override {
        error_position = position;
        error_message = ex.what();
        return false;
    }

    std::size_t error_position = 0;
    std::string error_message;

private:
    struct Frame {
        bool object;
        std::string pointer;
        std::string key;
        std::size_t index = 0;
    };

    std::string_view text_;
    const std::size_t* cursor_;
    SourceMap* map_;
    std::vector<Frame> stack_;

    std::string next_pointer() {
        if (stack_.empty()) return "";
        auto& top = stack_.back();
        if (top.object) return pointer_append(top.pointer, top.key);
        return pointer_append(top.pointer, top.index++);
    }

    bool scalar(std::size_t start) {
        map_->record_value(next_pointer(), start);
        return true;
    }

    bool open(bool object) {
        std::string p = next_pointer();
        map_->record_value(p, *cursor_ > 0 ? *cursor_ - 1 : 0);
        stack_.push_back(Frame{object, std::move(p), {}, 0});
        return true;
    }

    bool close() {
        stack_.pop_back();
        return true;
    }

    std::size_t literal_start(std::size_t len) const { return *cursor_ >= len ? *cursor_ - len : 0; }

    // The cursor sits just past the closing quote; walk back to the opening one.
    std::size_t string_start() const {
        std::size_t i = *cursor_ >= 2 ? *cursor_ - 2 : 0;
        while (i > 0) {
            if (text_[i] == '"') {
                std::size_t slashes = 0;
                while (i > slashes && text_[i - 1 - slashes] == '\\') ++slashes;
                if (slashes % 2 == 0) return i;
            }
            --i;
        }
        return 0;
    }

    // Numbers are terminated by one character of lookahead.
    std::size_t number_start() const {
        std::size_t end = *cursor_;
        if (end > 0 && end <= text_.size()) {
            char last = text_[end - 1];
            bool numeric = (last >= '0' && last <= '9') || last == '.' || last == 'e' || last == 'E' ||
                           last == '+' || last == '-';
            if (!numeric) --end;
        }
        std::size_t i = end;
        while (i > 0) {
            char c = text_[i - 1];
            if ((c >= '0' && c <= '9') || c == '.' || c == 'e' || c == 'E' || c == '+' || c == '-') --i;
            else break;
        }
        return i;
    }
};

}  // namespace

SourceMap::SourceMap(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i)
        if (text[i] == '\n') line_starts_.push_back(i + 1);
}

Location SourceMap::at_offset(std::size_t offset, std::string pointer) const {
    auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
    auto line = static_cast<int>(std::distance(line_starts_.begin(), it));
    std::size_t start = line_starts_[static_cast<std::size_t>(line - 1)];
    return Location{std::move(pointer), line, static_cast<int>(offset - start) + 1};
}

Location SourceMap::locate(const std::string& pointer) const {
    std::string p = pointer;
    while (true) {
        if (auto it = values_.find(p); it != values_.end()) return at_offset(it->second, pointer);
        if (p.empty()) return at_offset(0, pointer);
        p.erase(p.rfind('/'));
    }
}

Location SourceMap::locate_inside(const std::string& pointer, int inner) const {
    if (auto it = values_.find(pointer); it != values_.end())
        return at_offset(it->second + 1 + static_cast<std::size_t>(std::max(inner, 0)), pointer);
    return locate(pointer);
}

std::string pointer_append(const std::string& parent, std::string_view key) {
    std::string out = parent + "/";
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

std::string pointer_append(const std::string& parent, std::size_t index) {
    return parent + "/" + std::to_string(index);
}

std::variant<LocatedJson, Diagnostic> parse_located(std::string_view text) {
    LocatedJson out;
    out.map = SourceMap(text);
    std::size_t cursor = 0;
    Locator locator(text, &cursor, &out.map);
    TrackingIterator first(text.data(), &cursor, text.data());
    TrackingIterator last(text.data() + text.size(), nullptr, text.data());
    bool ok = nlohmann::json::sax_parse(first, last, &locator);
    if (!ok) {
        Diagnostic d;
        d.code = "json-syntax";
        std::string msg = locator.error_message;
        if (auto pos = msg.find("] "); pos != std::string::npos) msg = msg.substr(pos + 2);
        d.message = msg;
        std::size_t at = locator.error_position > 0 ? locator.error_position - 1 : 0;
        d.location = out.map.at_offset(std::min(at, text.size()), "");
        return d;
    }
    out.value = nlohmann::json::parse(text);
    return out;
}

}  // namespace valence::detail
