#pragma once

#include <string>
#include <string_view>

#include "demoforge/wire/canonical.hpp"
#include "demoforge/wire/message.hpp"

namespace demoforge::wire {

/// Canonical text for `m`. Byte-deterministic; throws WireError(non_finite)
/// if any numeric field is NaN or infinite.
std::string encode_message(const Message& m);

/// Strict decode. Unknown "t", a missing or extra field, a wrongly typed value
/// or a non-finite number throw WireError; teleop deltas above the
/// per-message bounds throw WireError(out_of_range). Only WireError escapes.
Message decode_message(std::string_view text);

Json message_to_json(const Message& m);
Message message_from_json(const Json& j);

/// Messages a client may send to the server.
bool is_client_message(const Message& m);

}  // namespace demoforge::wire
