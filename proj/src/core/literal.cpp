#include "simforge/core/model.hpp"

#include <cctype>

namespace simforge::core {

namespace {

// Recursive-descent recognizer for the subset of Python literals a state
// variable may be initialised with.
class LiteralScanner {
public:
    explicit LiteralScanner(std::string_view text) : text_(text) {}

    bool whole(ValueType type) {
        skip_ws();
        bool ok = false;
        switch (type) {
            case ValueType::Int: ok = integer(); break;
            case ValueType::Float: ok = number(); break;
            case ValueType::Bool: ok = keyword("True") || keyword("False"); break;
            case ValueType::String: ok = string(); break;
            case ValueType::List: ok = list(); break;
            case ValueType::Dict: ok = dict(); break;
        }
        skip_ws();
        return ok && pos_ == text_.size();
    }

private:
    static constexpr int kMaxDepth = 64;

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return at_end() ? '\0' : text_[pos_]; }

    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    bool keyword(std::string_view word) {
        if (text_.substr(pos_, word.size()) != word) return false;
        std::size_t end = pos_ + word.size();
        if (end < text_.size()) {
            char next = text_[end];
            if (std::isalnum(static_cast<unsigned char>(next)) || next == '_') return false;
        }
        pos_ = end;
        return true;
    }

    bool digits() {
        std::size_t start = pos_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
        return pos_ > start;
    }

    bool integer() {
        std::size_t start = pos_;
        if (peek() == '-' || peek() == '+') ++pos_;
        if (!digits()) {
            pos_ = start;
            return false;
        }
        if (peek() == '.' || peek() == 'e' || peek() == 'E') {
            pos_ = start;
            return false;
        }
        return true;
    }

    // Accepts integers too; an int literal is a valid float initialiser.
    bool number() {
        std::size_t start = pos_;
        if (peek() == '-' || peek() == '+') ++pos_;
        bool int_part = digits();
        bool frac_part = false;
        if (peek() == '.') {
            ++pos_;
            frac_part = digits();
        }
        if (!int_part && !frac_part) {
            pos_ = start;
            return false;
        }
        if (peek() == 'e' || peek() == 'E') {
            ++pos_;
            if (peek() == '-' || peek() == '+') ++pos_;
            if (!digits()) {
                pos_ = start;
                return false;
            }
        }
        return true;
    }

    bool string() {
        char quote = peek();
        if (quote != '\'' && quote != '"') return false;
        ++pos_;
        while (!at_end()) {
            char c = text_[pos_++];
            if (c == '\\') {
                if (at_end()) return false;
                ++pos_;
            } else if (c == quote) {
                return true;
            } else if (c == '\n') {
                return false;
            }
        }
        return false;
    }

    bool any_value() {
        if (++depth_ > kMaxDepth) return false;
        skip_ws();
        bool ok = false;
        char c = peek();
        if (c == '[') ok = list();
        else if (c == '{') ok = dict();
        else if (c == '(') ok = tuple();
        else if (c == '\'' || c == '"') ok = string();
        else ok = keyword("True") || keyword("False") || keyword("None") || number();
        --depth_;
        return ok;
    }

    bool sequence(char close) {
        skip_ws();
        if (consume(close)) return true;
        for (;;) {
            if (!any_value()) return false;
            if (consume(close)) return true;
            if (!consume(',')) return false;
            if (consume(close)) return true;
        }
    }

    bool list() { return consume('[') && sequence(']'); }
    bool tuple() { return consume('(') && sequence(')'); }

    bool dict() {
        if (!consume('{')) return false;
        skip_ws();
        if (consume('}')) return true;
        for (;;) {
            if (!any_value()) return false;
            if (!consume(':')) return false;
            if (!any_value()) return false;
            if (consume('}')) return true;
            if (!consume(',')) return false;
            if (consume('}')) return true;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

}  // namespace

bool literal_matches(std::string_view literal, ValueType type) {
    return LiteralScanner(literal).whole(type);
}

bool is_identifier(std::string_view text) {
    if (text.empty()) return false;
    auto head = static_cast<unsigned char>(text.front());
    if (!(std::isalpha(head) || head == '_')) return false;
    for (char c : text) {
        auto u = static_cast<unsigned char>(c);
        if (!(std::isalnum(u) || u == '_')) return false;
    }
    return true;
}

bool contains_word(std::string_view text, std::string_view word) {
    if (word.empty()) return false;
    auto is_word_char = [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) || u == '_';
    };
    std::size_t pos = text.find(word);
    while (pos != std::string_view::npos) {
        bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
        std::size_t end = pos + word.size();
        bool right_ok = end >= text.size() || !is_word_char(text[end]);
        if (left_ok && right_ok) return true;
        pos = text.find(word, pos + 1);
    }
    return false;
}

}  // namespace simforge::core
