# Concrete syntax of the Statechart family. The grammar accepts every
# presentation option; whether an option is enabled is decided by the parser
# against the active LanguageVariant.
CHART_GRAMMAR = r"""
chart: [stereotypes] "statechart" NAME "{" decl* "}"

stereotypes: "<<" stereotype ("," stereotype)* ">>"
stereotype: NAME ["=" NAME]

?decl: events_decl
     | flags_decl
     | vocabulary_decl
     | initial_decl
     | state_decl
     | transition

events_decl: "events" NAME+ ";"
flags_decl: "flags" NAME+ ";"
vocabulary_decl: "vocabulary" vocabulary_entry ("," vocabulary_entry)* ";"
vocabulary_entry: NAME ["=" NAME]
initial_decl: "initial" NAME ";"

state_decl: [STAR] "state" NAME state_body
          | [STAR] "state" NAME ";"?          -> bare_state
state_body: "{" decl* "}"

transition: "on" NAME [guard] ARROW NAME ";"
guard: "[" disj "]"
guard_text: disj

?disj: conj ("|" conj)*
?conj: neg ("&" neg)*
?neg: "!" neg                                -> negation
    | atom
?atom: "true"                                -> lit_true
     | "false"                               -> lit_false
     | NAME                                  -> flag
     | "(" disj ")"

ARROW: "->" | "=>"
STAR: "*"
NAME: /[A-Za-z][A-Za-z0-9_]*/

COMMENT: /\/\/[^\n]*/
%import common.WS
%ignore WS
%ignore COMMENT
"""

# Feature diagrams in the `.fm` keyword-tree format
FEATURE_MODEL_GRAMMAR = r"""
start: "feature" NAME [DOC] "{" group* "}"

?group: "mandatory" child                    -> mandatory
      | "optional" child                     -> optional
      | "alternative" "{" child* "}"         -> alternative
      | "or" "{" child* "}"                  -> or_group

child: NAME [DOC] [children]
children: "{" group* "}"

DOC: ESCAPED_STRING
NAME: /[A-Za-z][A-Za-z0-9_]*/

COMMENT: /(#|\/\/)[^\n]*/
%import common.ESCAPED_STRING
%import common.WS
%ignore WS
%ignore COMMENT
"""
