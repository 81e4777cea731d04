#pragma once

#include <string_view>

// Versioned evaluation prompt templates. The same texts ship as files under
// prompts/; a unit test pins the file bytes to these constants so the runtime
// templates and the shipped files cannot drift apart.

namespace dili::judge {

inline constexpr std::string_view kGevalRubricTemplate = R"TMPL(Compare the ACTUAL_OUTPUT hypothesis list from the HADES against
the EXPECTED_OUTPUT hypothesis list from the DILER Benchmark.

Reward:
- matching mechanistic themes,
- overlap in causal direction and confidence,
- preservation of the most important hypotheses,
- consistency with the dataset context in INPUT.

Penalize:
- invented mechanisms not supported by the research hypotheses,
- missing major mechanisms present in the research hypotheses,
- contradictions in mechanism direction, confidence, 
  or overall interpretation.

The DILER Benchmark hypothesis list should be treated 
as the reference output.
)TMPL";

inline constexpr std::string_view kPairwiseTemplate = R"TMPL(You are aligning two lists of DILI hypotheses for visualization.

Context:
- InChIKey: {inchikey}
- SMILES: {smiles}
- Dataset label: {label}

HADES hypotheses:
{HADES_hypotheses}

DILER Benchmark hypotheses:
{DILER_hypotheses}

Return:
1. Pairwise Alignments between HADES and DILER hypotheses,
2. A concise summary,
3. Edited HADES Output with explicit tags like [EXACT MATCH],
   [PARTIAL MATCH], [ONLY_IN_HADES], [CONTRADICTION],
4. Edited DILER Benchmark Output with explicit tags like 
   [EXACT MATCH], [PARTIAL MATCH], [ONLY_IN_DILER],
   [CONTRADICTION].

All four top-level fields are required in the response, 
even if some are empty.

Be faithful to the provided hypotheses. 
Do not invent new mechanisms.
)TMPL";

inline constexpr std::string_view kBaselineSystemTemplate = R"TMPL(You are a senior computational toxicologist and mechanistic safety 
scientist specializing in Drug-Induced Liver Injury (DILI) assessment.
- You have NO access to web search, literature databases,
clinical trial registries, regulatory databases, structure search tools, 
similarity tools, ADMET predictors, metabolite generators,
or any external retrieval.
- You must rely strictly on your own internal knowledge: chemistry, 
pharmacology, drug metabolism, mechanistic toxicology, 
structural alerts, and any drug-specific knowledge you have memorized 
for the molecule represented by the given SMILES.
Definition of "mechanism" in the DILI context covers, when relevant: 
- Molecular initiating event (MIE), e.g. BSEP inhibition, mitochondrial 
ETC inhibition, covalent protein binding after bioactivation. 
- Cellular injury mechanism, e.g. mitochondrial dysfunction,
oxidative stress, ER stress, bile acid accumulation. 
- Clinical DILI phenotype, e.g. hepatocellular, cholestatic, mixed, 
delayed idiosyncratic. 
- Causal driver source, e.g. parent compound, primary metabolite,
reactive intermediate.
Allowed `confidence_level` values: `High`, `Medium`, `Low`.
Allowed `mechanism_direction` values: 
`Hepatotoxic`  or `Safe`.
Final DILI classification scale (pick exactly one label):
- A  = well known cause of DILI
- B  = highly likely cause of DILI
- C  = probable cause of DILI
- D  = possible cause of DILI
- E  = unlikely cause of DILI
Quality rules for hypotheses:
- Return between 1 and 4 hypotheses, ordered most-supported first.
- Only include hypotheses you can actually justify from structure-based 
reasoning or memorized drug knowledge. 
Do NOT enumerate every category for completeness.
- `chain_of_thought` must be 5-7 numbered mechanistic 
steps (e.g. "1. ...") 
forming a coherent causal narrative that supports or 
refutes the hypothesis. 
Use phrasing like "This directly induces...", "As a consequence...", 
"Under these conditions...", "Alternatively...", "This leads to...".
Output rules:
- Return ONLY the structured object specified by the schema.
- `dili_classification` must be exactly one of: A, B, C, D, E.
- `dili_hypotheses` is an ordered list, most-supported hypothesis first.
- Do not output any preamble, markdown report, or extra commentary 
outside the structured fields.
)TMPL";

inline constexpr std::string_view kBaselineUserTemplate = R"TMPL(Assess the Drug-Induced Liver Injury (DILI) risk for the molecule below 
using only your internal knowledge. Do not search, do not invoke tools, 
do not fabricate retrieval results.

Molecule SMILES: {smiles}

Produce the structured DILI assessment.
)TMPL";

inline constexpr std::string_view kTxGemmaTemplate = R"TMPL(Instructions: Answer the following question about drug properties.
Context: Drug-induced liver injury (DILI) is fatal liver disease caused 
by drugs and it has been the single most frequent cause of safety-related 
drug marketing withdrawals for the past 50 years 
(e.g. iproniazid, ticrynafen, benoxaprofen).
Question: Given a drug SMILES string, predict whether it
(A) cannot cause DILI (B) can cause DILI
Drug SMILES: {smiles}
)TMPL";

}  // namespace dili::judge
