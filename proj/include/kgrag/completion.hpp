#pragma once
// Narrow LLM surface for helpers (keyword extraction, entity extraction)
// that send a bare prompt and read back text. Generation providers
// implement it alongside the full request interface.

#include <string>

namespace kgrag {

class TextCompleter {
public:
    virtual ~TextCompleter() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

} // namespace kgrag
