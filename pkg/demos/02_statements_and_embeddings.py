"""Walk-through: verbalize entities and paths into keyed statements and
serve text embeddings for them, with and without a real encoder.

Run with:  python3 demos/02_statements_and_embeddings.py
"""

import io

import numpy as np

from pathreason import (
    Path,
    RelationTemplate,
    TextEmbeddingStore,
    Verbalizer,
    load_graph,
    lookup,
    with_inverses,
    write_statements,
)


def main() -> None:
    kg = with_inverses(
        load_graph(
            ["肺静脉畸形引流\t疾病相关症状\t呼吸窘迫", "呼吸窘迫\t症状相关科室\t呼吸内科"],
            ["枣树皮\t枣树皮\t中药\t药品"],
        )
    )
    templates = {
        kg.relation_ids["疾病相关症状"]: RelationTemplate(
            relation=kg.relation_ids["疾病相关症状"],
            surface="{head}疾病的相关症状是{tail}",
        ),
        kg.relation_ids["症状相关科室"]: RelationTemplate(
            relation=kg.relation_ids["症状相关科室"],
            surface="{head}症状的相关科室是{tail}",
        ),
    }
    v = Verbalizer(kg, templates)

    entity = v.entity_statement_for(kg.entity_ids["枣树皮"])
    print(f"entity statement  {entity.key:016x}  {entity.text}")

    path = Path(
        entities=(
            kg.entity_ids["肺静脉畸形引流"],
            kg.entity_ids["呼吸窘迫"],
            kg.entity_ids["呼吸内科"],
        ),
        relations=(kg.relation_ids["疾病相关症状"], kg.relation_ids["症状相关科室"]),
    )
    stmt = v.path_statement(path)
    print(f"path statement    {stmt.key:016x}  {stmt.text}")

    # The export file is the hand-off point to any external text encoder.
    buf = io.StringIO()
    write_statements([entity, stmt], buf)
    print("\nstatement export for the encoder:")
    print(buf.getvalue())

    # Synthetic mode fills missing vectors deterministically, so the whole
    # engine runs before an encoder exists.
    store = TextEmbeddingStore(dim=8)
    vec = lookup(store, stmt.key, mode="synthetic", seed=0)
    print(f"synthetic vector  norm={np.linalg.norm(vec):.6f}  {np.round(vec, 3)}")


if __name__ == "__main__":
    main()
