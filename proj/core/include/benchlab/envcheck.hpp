#pragma once

#include <optional>
#include <string>
#include <vector>

namespace benchlab {

// Machine-state snapshot guarding cross-session comparisons. Every probe is
// best-effort: unreadable state stays unknown, it is never guessed.
struct EnvironmentFingerprint {
    std::string fingerprint_id;  // content hash of the fields below, minus captured_at
    std::string cpu_model;
    std::optional<std::string> governor;
    std::optional<bool> frequency_fixed;
    std::optional<bool> turbo_enabled;
    std::optional<bool> on_ac_power;
    std::string os_descriptor;
    std::string tool_version;
    std::string captured_at;  // excluded from the hash so "same state" matches across days

    // Recomputes fingerprint_id from the hashed fields.
    void rehash();
};

enum class EnvWarningKind { GovernorNotFixed, TurboEnabled, OnBattery, Unknown };

struct EnvWarning {
    EnvWarningKind kind;
    std::string message;
};

std::string to_string(EnvWarningKind k);

enum class FieldMismatchKind { Differs, Unverifiable };

struct FieldMismatch {
    std::string field;
    FieldMismatchKind kind;
    std::string a;  // rendered values ("unknown" when absent)
    std::string b;
};

// Reads CPU model, scaling governor, frequency pinning, turbo/boost state and
// power-supply status from the running system.
EnvironmentFingerprint capture_fingerprint();

// Pure: GovernorNotFixed when frequency_fixed == false, TurboEnabled when
// turbo_enabled == true, OnBattery when on_ac_power == false, plus one Unknown
// note per unknown tri-state field. Unknown never produces a hard warning.
std::vector<EnvWarning> check_environment(const EnvironmentFingerprint& fp);

// Field-by-field comparison; known-vs-unknown is a mismatch of kind
// Unverifiable, unknown-vs-unknown matches.
std::vector<FieldMismatch> diff_fingerprints(const EnvironmentFingerprint& a,
                                             const EnvironmentFingerprint& b);

// Stable 64-bit content hash used for fingerprints and spec-file hashes.
std::string content_hash(const std::string& data);

extern const char* const kToolVersion;

}  // namespace benchlab
