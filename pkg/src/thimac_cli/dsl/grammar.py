"""Lark grammar for ``.tm`` sources (LALR, contextual lexer)."""

import re

TM_GRAMMAR = r"""
start: _item*

_item: thimac
     | flow
     | trigger
     | var
     | event
     | edge
     | negedge
     | queue
     | timeline
     | scenario

// ---- static level -------------------------------------------------------

thimac: "thimac" NAME note? "{" _member* "}"
_member: action | thimac
action: action_kind (NAME | STRING)? note?
!action_kind: "create" | "process" | "release" | "transfer" "in" | "transfer" "out" | "receive"

flow: "flow" (NAME ":")? REF ("->" REF)+
trigger: "trigger" REF ("->" REF)+

var: "var" NAME ":" var_type domain? ("=" literal)?
!var_type: "int" | "text" | "bool"
domain: "in" signed_int ".." signed_int

note: "note" STRING

// ---- dynamic level ------------------------------------------------------

event: "event" NAME STRING? "=" "region" "{" (REF ("," REF)*)? "}" _clause*
_clause: guard | effect | external | note
guard: "guard" expr
effect: "effect" assignment ("," assignment)*
assignment: NAME ":=" expr
external: "external"

edge: "edge" NAME "->" NAME guard?
negedge: "negedge" NAME "->" "revert" NAME

queue: "queue" NAME ("{" phase* "}")?
phase: phase_kind NAME ("," NAME)*
!phase_kind: "arrive" | "free" | "dequeue" | "drain" | "busy"

// ---- timelines and scenarios --------------------------------------------

timeline: "timeline" NAME "{" tl_event* "}"
tl_event: "event" NAME STRING ("as" NAME)? anchor note?
?anchor: "at" DATE                -> at_anchor
       | "from" DATE "to" DATE    -> interval_anchor
       | "after" DATE             -> after_anchor
       | "unknown"                -> unknown_anchor

scenario: "scenario" SCENARIO_NAME "{" _scenario_item* "}"
_scenario_item: bind | stimulus | arrive | free | busy
bind: "bind" NAME "=" literal
stimulus: "stimulus" NAME at?
arrive: "arrive" NAME NAME at?
free: "free" NAME at?
busy: "busy" NAME at?
at: "at" INT

// ---- expressions --------------------------------------------------------

?expr: or_expr
?or_expr: and_expr
        | or_expr "||" and_expr      -> or_op
?and_expr: cmp_expr
         | and_expr "&&" cmp_expr    -> and_op
?cmp_expr: sum_expr
         | sum_expr COMP_OP sum_expr -> compare
?sum_expr: unary
         | sum_expr "+" unary        -> add
         | sum_expr "-" unary        -> sub
?unary: atom
      | "!" unary                    -> not_op
      | "-" unary                    -> neg_op
?atom: INT                           -> int_value
     | "true"                        -> true_value
     | "false"                       -> false_value
     | STRING                        -> text_value
     | NAME                          -> var_ref
     | "(" expr ")"

?literal: INT                        -> int_value
        | "-" INT                    -> neg_int_value
        | "true"                     -> true_value
        | "false"                    -> false_value
        | STRING                     -> text_value
?signed_int: INT                     -> int_value
           | "-" INT                 -> neg_int_value

// ---- terminals ----------------------------------------------------------

COMP_OP: "==" | "!=" | "<=" | ">=" | "<" | ">"
REF.2: /[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)+/
DATE.2: /\d{4}-\d{2}-\d{2}(T\d{2}:\d{2}(:\d{2}(\.\d+)?)?)?/
NAME: /[A-Za-z_][A-Za-z0-9_]*/
SCENARIO_NAME: /[A-Za-z_][A-Za-z0-9_]*(-[A-Za-z0-9_]+)*/
COMMENT: /#[^\n]*/

%import common.INT
%import common.ESCAPED_STRING -> STRING
%import common.WS
%ignore WS
%ignore COMMENT
"""

# Words the grammar reserves; an action label spelled like one is written quoted.
KEYWORDS = frozenset(re.findall(r'"([a-z_]+)"', TM_GRAMMAR))

# Human-readable names for pattern terminals in syntax diagnostics.
TERMINAL_NAMES = {
    "NAME": "a name",
    "SCENARIO_NAME": "a scenario name",
    "REF": "an action reference",
    "STRING": "a string",
    "INT": "an integer",
    "DATE": "a date",
    "COMP_OP": "a comparison",
    "$END": "end of input",
}
