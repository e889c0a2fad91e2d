/** Application shell: session bar, annotator queue flow, meta-review list. */

import { ApiClient, ApiError } from "./api.js";
import { renderMetaRow, renderQueueCard, renderSamplePanel, renderVerdictForm } from "./views.js";

type Role = "annotator" | "meta";

interface Session {
  role: Role;
  identity: string;
  api: ApiClient;
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function flash(message: string, isError = false): void {
  const bar = byId("flash");
  bar.textContent = message;
  bar.className = isError ? "flash error" : "flash";
  setTimeout(() => {
    bar.textContent = "";
    bar.className = "flash";
  }, 4000);
}

async function showQueue(session: Session): Promise<void> {
  const content = byId("content");
  content.replaceChildren();
  let next;
  try {
    next = await session.api.queueNext(session.identity);
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      content.append(Object.assign(document.createElement("p"), {
        textContent: "Queue is empty — nothing awaiting review.",
      }));
      return;
    }
    throw err;
  }
  content.append(
    renderQueueCard(document, next.sample, next.remaining, (id) =>
      void showSampleForVerdict(session, id),
    ),
  );
}

async function showSampleForVerdict(session: Session, sampleId: string): Promise<void> {
  const content = byId("content");
  const sample = await session.api.getSample(sampleId);
  content.replaceChildren(renderSamplePanel(document, sample));
  const form = renderVerdictForm(document, async (payload) => {
    try {
      const updated = await session.api.submitVerdict(sampleId, {
        ...payload,
        annotator_id: session.identity,
      });
      flash(`Verdict recorded: ${updated.status}`);
      await showQueue(session);
    } catch (err) {
      if (err instanceof ApiError && err.isConflict) {
        flash("Already decided elsewhere — refreshing your queue.", true);
        await showQueue(session);
      } else {
        flash(String(err), true);
      }
    }
  });
  content.append(form.root);
}

async function showMetaList(session: Session): Promise<void> {
  const content = byId("content");
  content.replaceChildren();
  const list = await session.api.listSamples("HumanVerified");
  if (list.items.length === 0) {
    content.append(Object.assign(document.createElement("p"), {
      textContent: "No samples awaiting meta review.",
    }));
    return;
  }
  for (const summary of list.items) {
    const detail = await session.api.getSample(summary.id);
    content.append(
      renderMetaRow(document, detail, async (payload) => {
        try {
          const updated = await session.api.submitMeta(summary.id, {
            ...payload,
            reviewer_id: session.identity,
          });
          flash(`Meta review recorded: final ${updated.category}`);
          await showMetaList(session);
        } catch (err) {
          if (err instanceof ApiError && err.isConflict) {
            flash("Already decided elsewhere — refreshing.", true);
            await showMetaList(session);
          } else {
            flash(String(err), true);
          }
        }
      }),
    );
    content.append(renderSamplePanel(document, detail));
  }
}

function start(): void {
  const form = byId("login") as HTMLFormElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const identity = (byId("identity") as HTMLInputElement).value.trim();
    const role = (byId("role") as HTMLSelectElement).value as Role;
    const token = (byId("token") as HTMLInputElement).value.trim() || null;
    if (!identity) {
      flash("Enter your reviewer id first.", true);
      return;
    }
    const session: Session = { role, identity, api: new ApiClient("", token) };
    byId("session-bar").textContent = `${identity} (${role})`;
    if (role === "annotator") {
      void showQueue(session);
    } else {
      void showMetaList(session);
    }
  });
}

start();
