import pluggy

specification = pluggy.HookspecMarker("dbinfer")
implementation = pluggy.HookimplMarker("dbinfer")
manager = pluggy.PluginManager("dbinfer")


class spec:
    @specification(firstresult=True)
    def validate_document(document, schema):
        "A hook to validate json documents."

    @specification(firstresult=True)
    def make_mapping(kind, N, document):
        "A hook to build an exposure mapping from a mapping document."

    @specification(firstresult=True)
    def make_outcome_rule(name, params):
        "A hook returning the callable behind a named outcome rule."

    @specification(firstresult=True)
    def load_corpus(name):
        "A hook to load a named example."

    @specification
    def corpus_names():
        "A hook listing the example names a plugin provides."

    @specification(firstresult=True)
    def make_population(name, N, seed):
        "A hook to generate a finite population for consistency sweeps."


manager.add_hookspecs(spec)
del pluggy
