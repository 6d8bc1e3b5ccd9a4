// Six-choice labeling tool: one reference model, six candidates, pick the
// two most style-similar; each submission stores eight triplets server-side.

import { fetchModels, nextSixChoice, submitSixChoice, ApiError, SixChoiceTask } from "./api.js";
import { TripletCounter, TwoPick } from "./selection.js";

export function setupSixChoiceView(root: HTMLElement): void {
  const picker = new TwoPick();
  const counter = new TripletCounter();
  let task: SixChoiceTask | null = null;

  root.innerHTML = `
    <div class="controls">
      <label>type X <select data-role="pairx"></select></label>
      <label>type Y <select data-role="pairy"></select></label>
      <button data-role="start">start</button>
      <span data-role="counter">0 triplets collected</span>
      <span class="status" data-role="status"></span>
    </div>
    <div class="task" data-role="task" hidden>
      <figure class="reference">
        <img data-role="ximg" alt="reference model" />
        <figcaption data-role="xlabel"></figcaption>
      </figure>
      <div class="candidates" data-role="candidates"></div>
      <button data-role="submit">submit (pick 2)</button>
    </div>
  `;

  const el = {
    pairx: root.querySelector<HTMLSelectElement>('[data-role="pairx"]')!,
    pairy: root.querySelector<HTMLSelectElement>('[data-role="pairy"]')!,
    start: root.querySelector<HTMLButtonElement>('[data-role="start"]')!,
    counter: root.querySelector<HTMLElement>('[data-role="counter"]')!,
    status: root.querySelector<HTMLElement>('[data-role="status"]')!,
    taskBox: root.querySelector<HTMLElement>('[data-role="task"]')!,
    ximg: root.querySelector<HTMLImageElement>('[data-role="ximg"]')!,
    xlabel: root.querySelector<HTMLElement>('[data-role="xlabel"]')!,
    candidates: root.querySelector<HTMLElement>('[data-role="candidates"]')!,
    submit: root.querySelector<HTMLButtonElement>('[data-role="submit"]')!,
  };

  function status(msg: string, isError = false): void {
    el.status.textContent = msg;
    el.status.classList.toggle("error", isError);
  }

  function renderTask(): void {
    if (!task) return;
    el.taskBox.hidden = false;
    el.ximg.src = task.x_thumbnail;
    el.xlabel.textContent = `reference: ${task.x}`;
    el.candidates.replaceChildren(
      ...task.candidates.map((id, i) => {
        const card = document.createElement("figure");
        card.dataset.id = id;
        card.className = "candidate";
        const img = document.createElement("img");
        img.loading = "lazy";
        img.src = task!.candidate_thumbnails[i];
        img.alt = id;
        const cap = document.createElement("figcaption");
        cap.textContent = id;
        card.append(img, cap);
        card.addEventListener("click", () => {
          const result = picker.toggle(id);
          if (result.blocked) status(result.blocked, true);
          else status("");
          for (const c of el.candidates.children) {
            c.classList.toggle("picked", result.selected.includes((c as HTMLElement).dataset.id!));
          }
        });
        return card;
      }),
    );
  }

  async function loadNext(): Promise<void> {
    task = await nextSixChoice(el.pairx.value, el.pairy.value);
    picker.reset();
    renderTask();
  }

  el.start.addEventListener("click", () => {
    void loadNext().catch((err) => status(String(err), true));
  });

  el.submit.addEventListener("click", async () => {
    const blocked = picker.submitBlockedReason();
    if (blocked || !task) {
      status(blocked ?? "no task loaded", true);
      return;
    }
    try {
      const result = await submitSixChoice(task.task_id, picker.asPair());
      // the counter only ever adds what the server reports
      el.counter.textContent = `${counter.addFromServer(result.triplet_count)} triplets collected`;
      status(`stored ${result.triplet_count} triplets in ${result.triplet_set}`);
      await loadNext(); // repeated as long as the user wishes
    } catch (err) {
      status(err instanceof ApiError ? err.message : String(err), true);
    }
  });

  void fetchModels()
    .then(({ models }) => {
      const types = [...new Set(models.map((m) => m.object_type))].sort();
      el.pairx.replaceChildren(...types.map((t) => new Option(t, t)));
      el.pairy.replaceChildren(...types.map((t) => new Option(t, t)));
    })
    .catch((err) => status(String(err), true));
}
