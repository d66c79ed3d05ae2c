#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rulekit/arff.hpp"

namespace rulekit {

/// Element tree for the small XML subset the experiment configuration
/// uses: nested elements, quoted attributes, character data with the five
/// named entities, comments and an optional declaration.
struct XmlNode {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<XmlNode> children;
  std::string text;
  std::size_t line = 0;

  const XmlNode* child(std::string_view child_name) const {
    for (const auto& c : children)
      if (c.name == child_name) return &c;
    return nullptr;
  }

  std::vector<const XmlNode*> children_named(std::string_view child_name) const {
    std::vector<const XmlNode*> out;
    for (const auto& c : children)
      if (c.name == child_name) out.push_back(&c);
    return out;
  }

  const std::string* attribute(std::string_view attr_name) const {
    for (const auto& [k, v] : attributes)
      if (k == attr_name) return &v;
    return nullptr;
  }
};

namespace detail {

class XmlParser {
public:
  explicit XmlParser(std::string_view src) : src_(src) {}

  XmlNode parse() {
    skip_prolog();
    XmlNode root = parse_element();
    skip_misc();
    if (pos_ < src_.size()) fail("content after the document element");
    return root;
  }

private:
  [[noreturn]] void fail(const std::string& why) const { throw ParseError(why, line_); }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

  char take() {
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  bool consume(std::string_view token) {
    if (src_.substr(pos_, token.size()) != token) return false;
    for (std::size_t i = 0; i < token.size(); ++i) take();
    return true;
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r' ||
            src_[pos_] == '\n'))
      take();
  }

  void skip_comment() {
    while (!consume("-->")) {
      if (pos_ >= src_.size()) fail("unterminated comment");
      take();
    }
  }

  void skip_misc() {
    while (true) {
      skip_ws();
      if (consume("<!--"))
        skip_comment();
      else
        return;
    }
  }

  void skip_prolog() {
    skip_ws();
    if (consume("<?xml")) {
      while (!consume("?>")) {
        if (pos_ >= src_.size()) fail("unterminated XML declaration");
        take();
      }
    }
    skip_misc();
  }

  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == ':';
  }

  std::string parse_name() {
    std::string name;
    while (pos_ < src_.size() && name_char(src_[pos_])) name.push_back(take());
    if (name.empty()) fail("expected a name");
    return name;
  }

  std::string decode_entity() {
    // Caller consumed '&'.
    std::string entity;
    while (peek() != ';') {
      if (pos_ >= src_.size() || entity.size() > 8) fail("malformed entity");
      entity.push_back(take());
    }
    take();  // ';'
    if (entity == "lt") return "<";
    if (entity == "gt") return ">";
    if (entity == "amp") return "&";
    if (entity == "quot") return "\"";
    if (entity == "apos") return "'";
    fail("unknown entity &" + entity + ";");
  }

  std::string parse_attribute_value() {
    char quote = take();
    if (quote != '"' && quote != '\'') fail("attribute value must be quoted");
    std::string value;
    while (peek() != quote) {
      if (pos_ >= src_.size()) fail("unterminated attribute value");
      char c = take();
      if (c == '&')
        value += decode_entity();
      else
        value.push_back(c);
    }
    take();
    return value;
  }

  XmlNode parse_element() {
    if (!consume("<")) fail("expected an element");
    XmlNode node;
    node.line = line_;
    node.name = parse_name();
    while (true) {
      skip_ws();
      if (consume("/>")) return node;
      if (consume(">")) break;
      std::string attr = parse_name();
      skip_ws();
      if (!consume("=")) fail("expected '=' after attribute " + attr);
      skip_ws();
      node.attributes.emplace_back(std::move(attr), parse_attribute_value());
    }

    // Content: text, children and comments until the matching close tag.
    while (true) {
      if (pos_ >= src_.size()) fail("unterminated element <" + node.name + ">");
      if (consume("<!--")) {
        skip_comment();
      } else if (src_.substr(pos_, 2) == "</") {
        consume("</");
        std::string closing = parse_name();
        if (closing != node.name)
          fail("mismatched closing tag </" + closing + "> for <" + node.name + ">");
        skip_ws();
        if (!consume(">")) fail("malformed closing tag");
        return node;
      } else if (peek() == '<') {
        node.children.push_back(parse_element());
      } else {
        char c = take();
        if (c == '&')
          node.text += decode_entity();
        else
          node.text.push_back(c);
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace detail

inline XmlNode parse_xml(std::string_view text) { return detail::XmlParser(text).parse(); }

}  // namespace rulekit
