#ifndef ARMORPARSE_DIAGNOSTICS_HPP
#define ARMORPARSE_DIAGNOSTICS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace armorparse {

enum class Severity { Error, Warning };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string code;
    std::string message;
    // Byte offset into the source the diagnostic refers to, if any.
    std::optional<std::size_t> offset;
    int line = 0;
    int col = 0;

    std::string to_string() const {
        std::string s = severity == Severity::Error ? "error" : "warning";
        s += " [" + code + "]";
        if (line > 0) {
            s += " at " + std::to_string(line) + ":" + std::to_string(col);
        }
        s += ": " + message;
        return s;
    }
};

class Diagnostics {
  public:
    void error(std::string code, std::string message,
               std::optional<std::size_t> offset = std::nullopt,
               int line = 0, int col = 0) {
        items_.push_back({Severity::Error, std::move(code), std::move(message),
                          offset, line, col});
    }

    void warning(std::string code, std::string message,
                 std::optional<std::size_t> offset = std::nullopt,
                 int line = 0, int col = 0) {
        items_.push_back({Severity::Warning, std::move(code),
                          std::move(message), offset, line, col});
    }

    void add(Diagnostic d) { items_.push_back(std::move(d)); }

    void merge(const Diagnostics& other) {
        items_.insert(items_.end(), other.items_.begin(), other.items_.end());
    }

    bool has_errors() const {
        for (const auto& d : items_)
            if (d.severity == Severity::Error) return true;
        return false;
    }

    std::size_t error_count() const {
        std::size_t n = 0;
        for (const auto& d : items_)
            if (d.severity == Severity::Error) ++n;
        return n;
    }

    std::size_t warning_count() const { return items_.size() - error_count(); }

    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    const std::vector<Diagnostic>& items() const { return items_; }

    std::string to_string() const {
        std::string s;
        for (const auto& d : items_) {
            s += d.to_string();
            s += '\n';
        }
        return s;
    }

  private:
    std::vector<Diagnostic> items_;
};

// Value-or-error carrier used by every fallible operation. Errors are full
// diagnostics so position information survives across layers.
template <typename T>
class Result {
  public:
    Result(T value) : v_(std::move(value)) {}
    Result(Diagnostic err) : v_(std::move(err)) {}

    static Result fail(std::string code, std::string message,
                       std::optional<std::size_t> offset = std::nullopt,
                       int line = 0, int col = 0) {
        return Result(Diagnostic{Severity::Error, std::move(code),
                                 std::move(message), offset, line, col});
    }

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    T& value() { return std::get<T>(v_); }
    const T& value() const { return std::get<T>(v_); }
    T&& take() { return std::move(std::get<T>(v_)); }

    const Diagnostic& error() const { return std::get<Diagnostic>(v_); }

    // Re-wrap the error for a Result of a different type.
    template <typename U>
    Result<U> forward() const {
        return Result<U>(error());
    }

  private:
    std::variant<T, Diagnostic> v_;
};

} // namespace armorparse

#endif
